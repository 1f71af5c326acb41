#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "conjoint/design.hpp"
#include "conjoint/parser.hpp"
#include "conjoint/respondent.hpp"

namespace conjoint {

inline constexpr int kStoreSchemaVersion = 1;

struct RunKey {
  std::string experiment_id;
  std::string model_name;
  std::string scenario_id;
  std::uint32_t cell_index = 0;
  std::uint32_t rep_index = 0;

  auto operator<=>(const RunKey&) const = default;
  std::string to_string() const;
};

enum class RunStatus { ok, refused, failed };

std::string_view to_string(RunStatus status);
RunStatus run_status_from_string(std::string_view s);

// Parse outcome of a provider answer: complete text goes through parse_score,
// an API refusal is a refusal, and truncated/transport failures are unparseable.
ParseOutcome classify_response(FinishStatus finish, std::string_view text);

// ok iff the outcome is a score, refused iff it is a refusal, failed otherwise.
RunStatus status_for(const ParseOutcome& outcome);

struct RunRecord {
  RunKey key;
  std::string prompt_hash;
  std::string raw_text;
  FinishStatus finish_status = FinishStatus::complete;
  ParseOutcome parse;
  int parser_version = kParserVersion;
  RunStatus status = RunStatus::failed;
  int attempt_count = 0;
  std::optional<std::string> started_at;  // ISO-8601 UTC; absent for logical-clock runs
  std::optional<std::string> finished_at;
  std::int64_t latency_ms = 0;
  std::map<std::string, std::string> provider_metadata;
};

/// First line of every store file: what the records below were produced from.
struct ExperimentHeader {
  std::string experiment_id;
  ModelConfig model;
  Design design;
  std::string design_hash;
  std::vector<std::string> scenario_ids;  // planned scenarios, design order
  std::uint32_t reps_per_cell = 0;
  std::int64_t experiment_seed = 0;
  PromptStyle prompt_style = PromptStyle::plain;
};

std::string serialize(const ExperimentHeader& header);
std::string serialize(const RunRecord& record);
RunRecord parse_record_line(const std::string& line);

/// Append-only line-delimited record file. Appends from many threads are
/// serialized; each record goes out as a single write so lines never interleave.
class RecordStore {
 public:
  struct Options {
    bool fsync_each_record = false;
  };

  explicit RecordStore(std::filesystem::path path) : RecordStore(std::move(path), Options{}) {}
  RecordStore(std::filesystem::path path, Options options);
  ~RecordStore();

  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  const std::filesystem::path& path() const { return path_; }

  // Header of the file, if it has one.
  const std::optional<ExperimentHeader>& header() const { return header_; }

  // Writes the header into an empty store; a no-op if an identical experiment id
  // is already recorded, Error(experiment_mismatch) otherwise.
  void ensure_header(const ExperimentHeader& header);

  void append(const RunRecord& record);

  // Keys of every terminal record currently in the file.
  std::vector<RunKey> completed_keys() const;

 private:
  void write_line(const std::string& line);

  std::filesystem::path path_;
  Options options_;
  int fd_ = -1;
  mutable std::mutex mutex_;
  std::optional<ExperimentHeader> header_;
  std::vector<RunKey> completed_;
};

struct StoreContents {
  std::optional<ExperimentHeader> header;
  std::vector<RunRecord> records;
};

struct LoadOptions {
  bool keep_last = false;  // resolve duplicate run keys by keeping the later record
};

// Reads one store file. Error(io) if unreadable, Error(corrupt_duplicate) on a
// repeated run key unless keep_last.
StoreContents read_store(const std::filesystem::path& path, const LoadOptions& options = {});

// ---------------------------------------------------------------------------

/// One analysis-ready row. Dummies reconstruct from cell_index.
struct Observation {
  int score = 0;
  std::vector<std::uint8_t> dummies;
  std::uint32_t scenario = 0;  // index into Dataset::scenario_ids
  std::uint32_t model = 0;     // index into Dataset::model_names
  std::uint32_t cluster = 0;   // vignette: scenario * 2^k + cell
  std::uint32_t cell = 0;
  std::uint32_t rep = 0;
  std::uint32_t experiment = 0;  // index into Dataset::experiments
};

struct CellBalance {
  std::string experiment_id;
  std::string model_name;
  std::string scenario_id;
  std::uint32_t cell_index = 0;
  std::uint32_t ok = 0;
  std::uint32_t refused = 0;
  std::uint32_t failed = 0;
};

struct ExperimentInfo {
  std::string experiment_id;
  std::string model_name;
  std::uint32_t reps_per_cell = 0;
  std::int64_t experiment_seed = 0;
};

struct Dataset {
  std::vector<Factor> factors;
  std::vector<std::string> scenario_ids;  // design order
  std::vector<std::string> scenario_titles;
  std::vector<std::string> model_names;   // order of first appearance
  std::vector<ExperimentInfo> experiments;
  std::string design_hash;
  std::vector<Observation> observations;
  std::vector<CellBalance> balance_report;  // one entry per planned (experiment, scenario, cell)

  std::size_t factor_count() const { return factors.size(); }
  std::uint32_t cluster_of(std::uint32_t scenario, std::uint32_t cell) const {
    return (scenario << factors.size()) | cell;
  }
};

// Builds the dataset for already-parsed store files (pooled in the given order).
Dataset dataset_from_contents(const std::vector<StoreContents>& stores,
                              const LoadOptions& options = {});

Dataset load_dataset(const std::vector<std::filesystem::path>& store_paths,
                     const LoadOptions& options = {});

struct BalanceVerdict {
  bool balanced = true;
  std::vector<CellBalance> imbalanced;
};

BalanceVerdict validate_balance(const Dataset& dataset, std::uint32_t expected_reps);

// Header plus one row per observation; returns the number of data rows.
std::size_t export_csv(const Dataset& dataset, const std::filesystem::path& path);

// Re-scores every record of `source` with the current parser into a new file.
std::size_t reparse_store(const std::filesystem::path& source, const std::filesystem::path& target);

}  // namespace conjoint
