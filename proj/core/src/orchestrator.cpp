#include "conjoint/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "conjoint/error.hpp"
#include "conjoint/hash.hpp"
#include "conjoint/parser.hpp"

namespace conjoint {

std::chrono::milliseconds BackoffPolicy::delay(int retry_number, std::mt19937_64& rng) const {
  const double ceiling = std::min(static_cast<double>(cap.count()),
                                  static_cast<double>(base.count()) * std::pow(factor, std::max(0, retry_number - 1)));
  if (!jitter || ceiling <= 0.0) return std::chrono::milliseconds(static_cast<std::int64_t>(ceiling));
  std::uniform_real_distribution<double> dist(0.0, ceiling);
  return std::chrono::milliseconds(static_cast<std::int64_t>(dist(rng)));
}

std::vector<RunKey> RunPlan::keys() const {
  std::vector<RunKey> out;
  out.reserve(total_requests());
  for (const auto& scenario : scenario_ids) {
    for (std::uint32_t cell = 0; cell < cell_count(); ++cell) {
      for (std::uint32_t rep = 0; rep < reps_per_cell; ++rep) {
        out.push_back({experiment_id, model.model_name, scenario, cell, rep});
      }
    }
  }
  return out;
}

ExperimentHeader RunPlan::header() const {
  return {experiment_id, model, design, design_hash, scenario_ids, reps_per_cell, experiment_seed, prompt_style};
}

RunPlan build_plan(const Design& design, const ModelConfig& model, std::uint32_t reps,
                   std::int64_t experiment_seed, const std::vector<std::string>& scenario_subset,
                   std::string experiment_id) {
  if (design.factors.empty() || design.scenarios.empty()) {
    throw Error(ErrorCode::invalid_plan, "design has no factors or no scenarios");
  }
  try {
    validate(design);
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_plan, e.what());
  }
  if (reps < 1) throw Error(ErrorCode::invalid_plan, "reps per cell must be at least 1");
  validate(model, design.factors.size());

  RunPlan plan;
  plan.model = model;
  plan.design = design;
  plan.design_hash = design_hash(design);
  plan.reps_per_cell = reps;
  plan.experiment_seed = experiment_seed;
  if (scenario_subset.empty()) {
    for (const auto& s : design.scenarios) plan.scenario_ids.push_back(s.id);
  } else {
    std::set<std::size_t> chosen;
    for (const auto& id : scenario_subset) {
      const std::size_t idx = design.scenario_index(id);
      if (idx == Design::npos) throw Error(ErrorCode::invalid_plan, "unknown scenario '" + id + "'");
      chosen.insert(idx);
    }
    for (auto idx : chosen) plan.scenario_ids.push_back(design.scenarios[idx].id);
  }
  plan.experiment_id = experiment_id.empty() ? model.model_name + "-seed" + std::to_string(experiment_seed)
                                             : std::move(experiment_id);
  return plan;
}

namespace {

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

// Minimum spacing between request starts.
class RateLimiter {
 public:
  RateLimiter(double per_minute, std::function<void(std::chrono::milliseconds)> sleep)
      : sleep_(std::move(sleep)) {
    if (per_minute > 0.0) interval_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(60.0 / per_minute));
  }

  void acquire() {
    if (interval_ == Clock::duration::zero()) return;
    Clock::time_point slot;
    {
      std::lock_guard lock(mutex_);
      slot = std::max(Clock::now(), next_);
      next_ = slot + interval_;
    }
    const auto wait = slot - Clock::now();
    if (wait > Clock::duration::zero()) sleep_(std::chrono::ceil<std::chrono::milliseconds>(wait));
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::function<void(std::chrono::milliseconds)> sleep_;
  Clock::duration interval_ = Clock::duration::zero();
  Clock::time_point next_{};
  std::mutex mutex_;
};

struct Work {
  std::size_t position = 0;  // among pending keys, plan order
  RunKey key;
  std::size_t scenario = 0;  // design index
};

bool retryable(const ParseOutcome& outcome, FinishStatus finish) {
  if (finish == FinishStatus::transport_error || finish == FinishStatus::truncated) return true;
  return outcome.kind != ParseKind::score;
}

}  // namespace

ExecutionSummary execute(const RunPlan& plan, RecordStore& store, Respondent& respondent,
                         const ExecutionOptions& options) {
  if (plan.parallelism < 1) throw Error(ErrorCode::invalid_plan, "parallelism must be at least 1");
  if (plan.retry_limit < 0) throw Error(ErrorCode::invalid_plan, "retry limit must be non-negative");
  store.ensure_header(plan.header());

  const std::vector<RunKey> keys = plan.keys();
  const std::vector<RunKey> done_list = store.completed_keys();
  const std::set<RunKey> done(done_list.begin(), done_list.end());

  ExecutionSummary summary;
  summary.planned = keys.size();
  std::vector<Work> pending;
  for (const auto& key : keys) {
    if (done.count(key)) {
      ++summary.already_complete;
    } else {
      pending.push_back({pending.size(), key, plan.design.scenario_index(key.scenario_id)});
    }
  }

  // Prompts per (scenario, cell), rendered once.
  struct Rendered {
    FactorAssignment assignment;
    std::string prompt;
    std::string hash;
  };
  std::map<std::pair<std::size_t, std::uint32_t>, Rendered> prompts;
  for (const auto& w : pending) {
    auto slot = std::make_pair(w.scenario, w.key.cell_index);
    if (prompts.count(slot)) continue;
    Vignette v = render_vignette(plan.design, w.scenario, w.key.cell_index, plan.prompt_style);
    std::string hash = sha256_tag(v.prompt);
    prompts.emplace(slot, Rendered{std::move(v.assignment), std::move(v.prompt), std::move(hash)});
  }

  const auto sleep = options.sleep ? options.sleep : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  const bool wall_clock = options.wall_clock.value_or(!respondent.deterministic());
  const bool ordered = options.commit_order == CommitOrder::plan_order ||
                       (options.commit_order == CommitOrder::automatic && respondent.deterministic());
  RateLimiter limiter(plan.model.provider == ProviderKind::synthetic ? 0.0 : plan.rate_limit_per_minute, sleep);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> requests{0};
  std::mutex commit_mutex;
  std::map<std::size_t, RunRecord> reorder;
  std::size_t next_commit = 0;
  std::exception_ptr failure;

  auto append_locked = [&](const RunRecord& r) {
    store.append(r);
    ++summary.new_records;
    switch (r.status) {
      case RunStatus::ok: ++summary.ok; break;
      case RunStatus::refused: ++summary.refused; break;
      case RunStatus::failed: ++summary.failed; break;
    }
    summary.total_latency_ms += r.latency_ms;
    if (options.stop_after && summary.new_records >= *options.stop_after) stop = true;
    if (options.progress) {
      options.progress({summary.already_complete + summary.new_records, summary.planned, summary.failed,
                        summary.refused});
    }
  };

  auto commit = [&](std::size_t position, RunRecord record) {
    std::lock_guard lock(commit_mutex);
    if (!ordered) {
      append_locked(record);
      return;
    }
    reorder.emplace(position, std::move(record));
    for (auto it = reorder.find(next_commit); it != reorder.end(); it = reorder.find(next_commit)) {
      append_locked(it->second);
      reorder.erase(it);
      ++next_commit;
      if (stop) break;
    }
  };

  auto run_one = [&](const Work& w) -> RunRecord {
    const Rendered& rendered = prompts.at({w.scenario, w.key.cell_index});
    std::mt19937_64 jitter_rng(std::hash<std::string>{}(w.key.to_string()));
    RunRecord record;
    record.key = w.key;
    record.prompt_hash = rendered.hash;
    if (wall_clock) record.started_at = iso_now();

    QueryRequest request;
    request.prompt = rendered.prompt;
    request.assignment = &rendered.assignment;
    request.stream = {plan.experiment_seed, w.key.scenario_id, w.key.cell_index, w.key.rep_index};
    if (plan.model.seed) request.seed = derive_request_seed(request.stream);

    for (int attempt = 1;; ++attempt) {
      limiter.acquire();
      request.request_tag = w.key.to_string() + "#" + std::to_string(attempt);
      record.attempt_count = attempt;
      ++requests;
      RawResponse response;
      try {
        response = respondent.answer(request);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::protocol) throw;
        record.raw_text.clear();
        record.finish_status = FinishStatus::complete;
        record.parse = ParseOutcome{};
        record.status = RunStatus::failed;
        record.provider_metadata = {{"error", e.what()}};
        break;
      }
      record.raw_text = response.text;
      record.finish_status = response.finish_status;
      record.parse = classify_response(response.finish_status, response.text);
      record.status = status_for(record.parse);
      record.provider_metadata = std::move(response.provider_metadata);
      if (wall_clock) record.latency_ms += response.latency_ms;
      if (!retryable(record.parse, record.finish_status) || attempt > plan.retry_limit) break;
      sleep(plan.backoff.delay(attempt, jitter_rng));
    }
    if (wall_clock) record.finished_at = iso_now();
    return record;
  };

  auto worker = [&] {
    try {
      while (!stop) {
        const std::size_t i = next.fetch_add(1);
        if (i >= pending.size()) break;
        commit(pending[i].position, run_one(pending[i]));
      }
    } catch (...) {
      std::lock_guard lock(commit_mutex);
      if (!failure) failure = std::current_exception();
      stop = true;
    }
  };

  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(plan.parallelism, std::max<std::size_t>(pending.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (failure) std::rethrow_exception(failure);
  summary.requests_issued = requests.load();
  summary.interrupted = summary.already_complete + summary.new_records < summary.planned;
  return summary;
}

ExecutionSummary resume(const RunPlan& plan, RecordStore& store, Respondent& respondent,
                        const ExecutionOptions& options) {
  if (store.header() && store.header()->experiment_id != plan.experiment_id) {
    throw Error(ErrorCode::experiment_mismatch, "store " + store.path().string() + " belongs to experiment '" +
                                                    store.header()->experiment_id + "', plan is '" +
                                                    plan.experiment_id + "'");
  }
  return execute(plan, store, respondent, options);
}

}  // namespace conjoint
