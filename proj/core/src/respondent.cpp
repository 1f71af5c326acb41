#include "conjoint/respondent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>

#include "conjoint/error.hpp"
#include "json_io.hpp"

namespace conjoint {

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::openai_compatible: return "openai_compatible";
    case ProviderKind::anthropic: return "anthropic";
    case ProviderKind::gemini: return "gemini";
    case ProviderKind::synthetic: return "synthetic";
  }
  return "synthetic";
}

ProviderKind provider_kind_from_string(std::string_view s) {
  if (s == "openai_compatible" || s == "openai") return ProviderKind::openai_compatible;
  if (s == "anthropic") return ProviderKind::anthropic;
  if (s == "gemini") return ProviderKind::gemini;
  if (s == "synthetic") return ProviderKind::synthetic;
  throw Error(ErrorCode::configuration, "unknown provider '" + std::string(s) + "'");
}

std::string_view credential_env_var(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::openai_compatible: return "OPENAI_API_KEY";
    case ProviderKind::anthropic: return "ANTHROPIC_API_KEY";
    case ProviderKind::gemini: return "GEMINI_API_KEY";
    case ProviderKind::synthetic: return "";
  }
  return "";
}

std::string_view to_string(FinishStatus status) {
  switch (status) {
    case FinishStatus::complete: return "complete";
    case FinishStatus::truncated: return "truncated";
    case FinishStatus::refused_by_api: return "refused_by_api";
    case FinishStatus::transport_error: return "transport_error";
  }
  return "transport_error";
}

FinishStatus finish_status_from_string(std::string_view s) {
  if (s == "complete") return FinishStatus::complete;
  if (s == "truncated") return FinishStatus::truncated;
  if (s == "refused_by_api") return FinishStatus::refused_by_api;
  if (s == "transport_error") return FinishStatus::transport_error;
  throw Error(ErrorCode::invalid_input, "unknown finish status '" + std::string(s) + "'");
}

void validate(const SyntheticSpec& spec, std::size_t factor_count) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::configuration, "synthetic spec: " + msg); };
  if (spec.coefficients.size() != factor_count) {
    fail("expected " + std::to_string(factor_count) + " coefficients, got " +
         std::to_string(spec.coefficients.size()));
  }
  if (!spec.noise_sd_shift.empty() && spec.noise_sd_shift.size() != factor_count) {
    fail("noise_sd_shift must be empty or have one entry per factor");
  }
  if (!(spec.noise_sd >= 0.0)) fail("noise_sd must be non-negative");
  if (spec.granularity < 1) fail("granularity must be positive");
  if (!(spec.refusal_rate >= 0.0 && spec.refusal_rate <= 1.0)) fail("refusal_rate must be in [0, 1]");
  for (const auto& term : spec.interactions) {
    if (term.first >= factor_count || term.second >= factor_count || term.first == term.second) {
      fail("interaction refers to an invalid factor pair");
    }
  }
}

void validate(const ModelConfig& config, std::size_t factor_count) {
  if (!(config.temperature >= 0.0 && config.temperature <= 2.0)) {
    throw Error(ErrorCode::configuration, "temperature must be in [0, 2]");
  }
  if (config.max_output_tokens < 1) {
    throw Error(ErrorCode::configuration, "max_output_tokens must be positive");
  }
  if (config.model_name.empty()) throw Error(ErrorCode::configuration, "model name is empty");
  if (config.provider == ProviderKind::synthetic) {
    if (!config.synthetic) throw Error(ErrorCode::configuration, "synthetic provider requires a synthetic spec");
    validate(*config.synthetic, factor_count);
  }
}

namespace {

// SplitMix64 finalizer; used as a keyed counter-based generator.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class KeyedStream {
 public:
  explicit KeyedStream(const StreamKey& key) {
    std::uint64_t k = mix64(static_cast<std::uint64_t>(key.experiment_seed));
    k = mix64(k ^ fnv1a(key.scenario_id));
    k = mix64(k ^ key.cell_index);
    key_ = mix64(k ^ (static_cast<std::uint64_t>(key.rep_index) << 20));
  }

  // Uniform in [0, 1) for counter slot i.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(mix64(key_ + (counter + 1) * 0xd1b54a32d192ed03ULL) >> 11) * 0x1.0p-53;
  }

  double normal(std::uint64_t counter) const {
    const double u1 = 1.0 - uniform(counter);
    const double u2 = uniform(counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_ = 0;
};

}  // namespace

std::int64_t derive_request_seed(const StreamKey& key) {
  const KeyedStream stream(key);
  return static_cast<std::int64_t>(stream.uniform(7) * 2147483647.0);
}

RawResponse synthetic_query(const FactorAssignment& assignment, const SyntheticSpec& spec,
                            const StreamKey& key) {
  const KeyedStream stream(key);
  RawResponse r;
  r.provider_metadata["provider"] = "synthetic";
  if (spec.refusal_rate > 0.0 && stream.uniform(0) < spec.refusal_rate) {
    r.text = kSyntheticRefusalText;
    return r;
  }
  double latent = spec.intercept;
  double sd = spec.noise_sd;
  for (std::size_t j = 0; j < assignment.bits.size(); ++j) {
    if (!assignment.bits[j]) continue;
    latent += spec.coefficients.at(j);
    if (!spec.noise_sd_shift.empty()) sd += spec.noise_sd_shift[j];
  }
  for (const auto& term : spec.interactions) {
    if (assignment.bits.at(term.first) && assignment.bits.at(term.second)) latent += term.coefficient;
  }
  if (sd > 0.0) latent += sd * stream.normal(1);
  const double g = spec.granularity;
  const double rounded = g * std::round(latent / g);
  const int score = static_cast<int>(std::clamp(rounded, 0.0, 100.0));
  r.text = std::to_string(score);
  return r;
}

ProviderRespondent::ProviderRespondent(ModelConfig config) : config_(std::move(config)) {
  if (config_.provider == ProviderKind::synthetic) {
    throw Error(ErrorCode::configuration, "ProviderRespondent cannot serve the synthetic provider");
  }
  const std::string var(credential_env_var(config_.provider));
  const char* value = std::getenv(var.c_str());
  if (value == nullptr || *value == '\0') {
    throw Error(ErrorCode::configuration, "missing credential: set " + var + " for provider " +
                                              std::string(to_string(config_.provider)));
  }
}

RawResponse ProviderRespondent::answer(const QueryRequest& request) {
  if (!request.seed || !config_.seed) return query(request.prompt, config_, request.request_tag);
  ModelConfig seeded = config_;
  seeded.seed = request.seed;
  return query(request.prompt, seeded, request.request_tag);
}

RawResponse SyntheticRespondent::answer(const QueryRequest& request) {
  if (request.assignment == nullptr) {
    throw Error(ErrorCode::invalid_input, "synthetic respondent needs the factor assignment");
  }
  return synthetic_query(*request.assignment, spec_, request.stream);
}

std::unique_ptr<Respondent> make_respondent(const ModelConfig& config) {
  if (config.provider == ProviderKind::synthetic) {
    if (!config.synthetic) throw Error(ErrorCode::configuration, "synthetic provider requires a synthetic spec");
    return std::make_unique<SyntheticRespondent>(*config.synthetic);
  }
  return std::make_unique<ProviderRespondent>(config);
}

PricingTable load_pricing(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open pricing file " + path.string());
  detail::Json j;
  try {
    j = detail::Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::configuration, "pricing file " + path.string() + ": " + e.what());
  }
  PricingTable table;
  for (const auto& [model, entry] : j.items()) {
    const std::string ctx = "pricing entry '" + model + "'";
    table[model] = {detail::required<double>(entry, "input_per_million", ErrorCode::configuration, ctx),
                    detail::required<double>(entry, "output_per_million", ErrorCode::configuration, ctx)};
  }
  return table;
}

CostReport estimate_cost(std::uint64_t plan_size, const ModelConfig& config,
                         std::uint64_t mean_prompt_tokens, std::uint64_t mean_output_tokens,
                         const PricingTable& pricing) {
  CostReport report;
  report.requests = plan_size;
  report.prompt_tokens = plan_size * mean_prompt_tokens;
  report.output_tokens = plan_size * mean_output_tokens;
  if (config.provider == ProviderKind::synthetic) {
    report.usd = 0.0;
  } else if (auto it = pricing.find(config.model_name); it != pricing.end()) {
    report.usd = static_cast<double>(report.prompt_tokens) * it->second.input_per_million / 1e6 +
                 static_cast<double>(report.output_tokens) * it->second.output_per_million / 1e6;
  }
  return report;
}

}  // namespace conjoint
