#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conjoint/design.hpp"

namespace conjoint {

enum class ProviderKind { openai_compatible, anthropic, gemini, synthetic };

std::string_view to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(std::string_view s);

// Environment variable holding the credential for a provider ("" for synthetic).
std::string_view credential_env_var(ProviderKind kind);

/// A pairwise interaction term added to the synthetic linear predictor when both
/// factors are high.
struct SyntheticInteraction {
  std::size_t first = 0;
  std::size_t second = 0;
  double coefficient = 0.0;
};

/// Parameters of the deterministic synthetic respondent. The latent score is
/// intercept + sum(coefficients[j] * bit_j) + interactions + N(0, sd), where
/// sd = noise_sd + sum(noise_sd_shift[j] * bit_j); it is rounded to the nearest
/// multiple of granularity and clamped to [0, 100].
struct SyntheticSpec {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double noise_sd = 0.0;
  int granularity = 1;
  double refusal_rate = 0.0;
  std::vector<double> noise_sd_shift;  // optional, one per factor
  std::vector<SyntheticInteraction> interactions;
};

void validate(const SyntheticSpec& spec, std::size_t factor_count);

struct ModelConfig {
  ProviderKind provider = ProviderKind::openai_compatible;
  std::string model_name = "gpt-4o-mini";
  double temperature = 1.0;
  std::optional<std::int64_t> seed;
  int max_output_tokens = 64;
  std::optional<std::string> endpoint_url;
  std::chrono::milliseconds request_timeout{60000};
  std::optional<SyntheticSpec> synthetic;
};

void validate(const ModelConfig& config, std::size_t factor_count);

enum class FinishStatus { complete, truncated, refused_by_api, transport_error };

std::string_view to_string(FinishStatus status);
FinishStatus finish_status_from_string(std::string_view s);

struct RawResponse {
  std::string text;
  FinishStatus finish_status = FinishStatus::complete;
  std::int64_t latency_ms = 0;
  std::map<std::string, std::string> provider_metadata;
};

/// Identifies the noise stream of one synthetic draw.
struct StreamKey {
  std::int64_t experiment_seed = 0;
  std::string scenario_id;
  std::uint32_t cell_index = 0;
  std::uint32_t rep_index = 0;
};

inline constexpr const char* kSyntheticRefusalText =
    "I cannot provide a recommendation on ordering a military invasion.";

/// Sends one single-turn user message to a networked provider. Exactly one HTTP
/// request is made. HTTP 429/5xx and connection failures come back as
/// transport_error; refusals come back as refused_by_api. Throws
/// Error(configuration) for a missing credential or rejected key and
/// Error(protocol) for a payload that does not match the provider's schema.
RawResponse query(std::string_view prompt, const ModelConfig& config, std::string_view request_tag);

/// Pure function of (assignment, spec, key).
RawResponse synthetic_query(const FactorAssignment& assignment, const SyntheticSpec& spec,
                            const StreamKey& key);

// Per-request provider seed. Sending one seed for every repetition would make
// seed-honouring providers repeat the same answer, so each run key gets its own.
std::int64_t derive_request_seed(const StreamKey& key);

struct QueryRequest {
  std::string_view prompt;
  const FactorAssignment* assignment = nullptr;
  StreamKey stream;
  std::string request_tag;
  std::optional<std::int64_t> seed;  // overrides ModelConfig::seed when set
};

/// Something that answers a vignette with text.
class Respondent {
 public:
  virtual ~Respondent() = default;
  virtual RawResponse answer(const QueryRequest& request) = 0;
  // Deterministic respondents get plan-ordered commits and logical timestamps.
  virtual bool deterministic() const { return false; }
  virtual std::string_view provider_name() const = 0;
};

class ProviderRespondent final : public Respondent {
 public:
  // Throws Error(configuration) when the provider's credential is not set.
  explicit ProviderRespondent(ModelConfig config);
  RawResponse answer(const QueryRequest& request) override;
  std::string_view provider_name() const override { return to_string(config_.provider); }

 private:
  ModelConfig config_;
};

class SyntheticRespondent final : public Respondent {
 public:
  explicit SyntheticRespondent(SyntheticSpec spec) : spec_(std::move(spec)) {}
  RawResponse answer(const QueryRequest& request) override;
  bool deterministic() const override { return true; }
  std::string_view provider_name() const override { return "synthetic"; }

 private:
  SyntheticSpec spec_;
};

std::unique_ptr<Respondent> make_respondent(const ModelConfig& config);

// --- cost estimation -------------------------------------------------------

struct TokenPrice {
  double input_per_million = 0.0;
  double output_per_million = 0.0;
};

using PricingTable = std::map<std::string, TokenPrice>;

// JSON object: { "<model>": { "input_per_million": x, "output_per_million": y } }.
PricingTable load_pricing(const std::filesystem::path& path);

struct CostReport {
  std::uint64_t requests = 0;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t output_tokens = 0;
  std::optional<double> usd;  // empty when the model has no known price
};

CostReport estimate_cost(std::uint64_t plan_size, const ModelConfig& config,
                         std::uint64_t mean_prompt_tokens, std::uint64_t mean_output_tokens,
                         const PricingTable& pricing = {});

}  // namespace conjoint
