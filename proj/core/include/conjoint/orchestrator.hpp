#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "conjoint/design.hpp"
#include "conjoint/respondent.hpp"
#include "conjoint/store.hpp"

namespace conjoint {

/// Exponential backoff with full jitter: the n-th retry waits a uniform draw
/// from [0, min(cap, base * factor^(n-1))].
struct BackoffPolicy {
  std::chrono::milliseconds base{1000};
  double factor = 2.0;
  std::chrono::milliseconds cap{60000};
  bool jitter = true;

  std::chrono::milliseconds delay(int retry_number, std::mt19937_64& rng) const;
};

struct RunPlan {
  std::string experiment_id;
  ModelConfig model;
  Design design;
  std::string design_hash;
  std::vector<std::string> scenario_ids;  // design order
  std::uint32_t reps_per_cell = 100;
  unsigned parallelism = 1;
  int retry_limit = 3;
  std::int64_t experiment_seed = 0;
  BackoffPolicy backoff;
  double rate_limit_per_minute = 60.0;  // 0 disables; never applied to the synthetic provider
  PromptStyle prompt_style = PromptStyle::plain;

  std::size_t cell_count() const { return design.cell_count(); }
  std::size_t total_requests() const { return scenario_ids.size() * cell_count() * reps_per_cell; }

  // Every run key, ordered by scenario, then cell, then rep.
  std::vector<RunKey> keys() const;
  ExperimentHeader header() const;
};

// Throws Error(invalid_plan) for an empty design or reps < 1. An empty
// scenario subset means all scenarios; an empty experiment id derives one from
// the model name and seed.
RunPlan build_plan(const Design& design, const ModelConfig& model, std::uint32_t reps,
                   std::int64_t experiment_seed, const std::vector<std::string>& scenario_subset = {},
                   std::string experiment_id = {});

enum class CommitOrder {
  automatic,    // plan order for deterministic respondents, as-completed otherwise
  plan_order,   // records reach the store in plan order whatever the scheduling
  as_completed,
};

struct ProgressEvent {
  std::size_t done = 0;  // terminal records, including ones found on disk
  std::size_t total = 0;
  std::size_t failed = 0;
  std::size_t refused = 0;
};

struct ExecutionOptions {
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
  std::function<void(const ProgressEvent&)> progress;
  std::optional<std::size_t> stop_after;  // stop issuing work after this many new records
  CommitOrder commit_order = CommitOrder::automatic;
  std::optional<bool> wall_clock;  // timestamps; defaults to !respondent.deterministic()
};

struct ExecutionSummary {
  std::size_t planned = 0;
  std::size_t already_complete = 0;
  std::size_t new_records = 0;
  std::size_t requests_issued = 0;
  std::size_t ok = 0;
  std::size_t refused = 0;
  std::size_t failed = 0;
  std::int64_t total_latency_ms = 0;
  bool interrupted = false;
};

/// Queries every planned key that has no terminal record in the store and
/// appends exactly one record per key. Transport errors and truncations are
/// retried with backoff; refusals and unparseable answers are retried and then
/// recorded; protocol errors are recorded as failed. Configuration errors and
/// store write failures abort the run, leaving it resumable.
ExecutionSummary execute(const RunPlan& plan, RecordStore& store, Respondent& respondent,
                         const ExecutionOptions& options = {});

// Same as execute, but refuses outright when the store belongs to another experiment.
ExecutionSummary resume(const RunPlan& plan, RecordStore& store, Respondent& respondent,
                        const ExecutionOptions& options = {});

}  // namespace conjoint
