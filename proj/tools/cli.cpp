#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "conjoint/analysis.hpp"
#include "conjoint/design.hpp"
#include "conjoint/error.hpp"
#include "conjoint/orchestrator.hpp"
#include "conjoint/parser.hpp"
#include "conjoint/report.hpp"
#include "conjoint/respondent.hpp"
#include "conjoint/store.hpp"

namespace conjoint::cli {

namespace {

using nlohmann::json;

// Truth used by the synthetic respondent when no coefficients are given for
// the built-in design: same signs and rough magnitudes as the pooled estimates.
constexpr double kDefaultIntercept = 30.0;
const std::vector<double> kDefaultCoefficients = {20, 25, -5, -7, -6, -9, 1};

struct DesignArgs {
  std::string path;
  bool builtin = false;
  std::vector<std::string> scenarios;
  bool html = false;
};

struct ModelArgs {
  std::string provider = "synthetic";
  std::string model;
  double temperature = 1.0;
  std::optional<std::int64_t> seed;
  int max_tokens = 64;
  std::string endpoint;
  double timeout_s = 60.0;
  // synthetic respondent
  std::string synthetic_spec;
  std::optional<double> intercept;
  std::vector<double> coefficients;
  double noise = 0.0;
  int granularity = 1;
  double refusal_rate = 0.0;
};

struct RunArgs {
  std::uint32_t reps = 100;
  unsigned parallelism = 4;
  int retries = 3;
  std::string store_path;
  double rate_limit = 60.0;
  std::string experiment_id;
  bool fsync = false;
  int backoff_base_ms = 1000;
  bool quiet = false;
};

void add_design_options(CLI::App* cmd, DesignArgs& d) {
  cmd->add_option("--design", d.path, "Design config file (JSON)")->check(CLI::ExistingFile);
  cmd->add_flag("--builtin", d.builtin, "Use the compiled-in design (default when --design is absent)");
  cmd->add_option("--scenario", d.scenarios, "Restrict to these scenario ids (repeatable)");
  cmd->add_flag("--html", d.html, "Render the analyst block with HTML markup");
}

void add_model_options(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--provider", m.provider, "synthetic | openai | anthropic | gemini")
      ->check(CLI::IsMember({"synthetic", "openai", "openai_compatible", "anthropic", "gemini"}));
  cmd->add_option("--model", m.model, "Provider model name (default gpt-4o-mini, or 'synthetic')");
  cmd->add_option("--temperature", m.temperature, "Sampling temperature")->check(CLI::Range(0.0, 2.0));
  cmd->add_option("--seed", m.seed, "Experiment seed; per-request seeds derive from it");
  cmd->add_option("--max-tokens", m.max_tokens, "Max output tokens")->check(CLI::PositiveNumber);
  cmd->add_option("--endpoint", m.endpoint, "Base URL override (proxies, stubs)");
  cmd->add_option("--timeout", m.timeout_s, "Request timeout in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--synthetic-spec", m.synthetic_spec, "Synthetic respondent spec (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--intercept", m.intercept, "Synthetic intercept (default 30)");
  cmd->add_option("--coef", m.coefficients, "Synthetic coefficients, one per factor")->delimiter(',');
  cmd->add_option("--noise", m.noise, "Synthetic noise sd")->check(CLI::NonNegativeNumber);
  cmd->add_option("--granularity", m.granularity, "Round synthetic scores to this multiple")->check(CLI::PositiveNumber);
  cmd->add_option("--refusal-rate", m.refusal_rate, "Synthetic refusal probability")->check(CLI::Range(0.0, 1.0));
}

Design resolve_design(const DesignArgs& d) {
  return d.path.empty() ? builtin_design() : load_design(d.path);
}

SyntheticSpec load_synthetic_spec(const std::string& path, const Design& design) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open synthetic spec " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::configuration, "synthetic spec " + path + ": " + e.what());
  }
  auto factor = [&](const json& v) -> std::size_t {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    const std::size_t idx = design.factor_index(v.get<std::string>());
    if (idx == Design::npos) throw Error(ErrorCode::configuration, "synthetic spec names unknown factor " + v.dump());
    return idx;
  };
  try {
    SyntheticSpec s;
    s.intercept = j.value("intercept", 0.0);
    s.coefficients = j.at("coefficients").get<std::vector<double>>();
    s.noise_sd = j.value("noise_sd", 0.0);
    s.granularity = j.value("granularity", 1);
    s.refusal_rate = j.value("refusal_rate", 0.0);
    s.noise_sd_shift = j.value("noise_sd_shift", std::vector<double>{});
    for (const auto& t : j.value("interactions", json::array())) {
      s.interactions.push_back({factor(t.at("first")), factor(t.at("second")), t.at("coefficient").get<double>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::configuration, "synthetic spec " + path + ": " + e.what());
  }
}

ModelConfig resolve_model(const ModelArgs& m, const Design& design) {
  ModelConfig c;
  c.provider = provider_kind_from_string(m.provider);
  c.temperature = m.temperature;
  c.seed = m.seed;
  c.max_output_tokens = m.max_tokens;
  if (!m.endpoint.empty()) c.endpoint_url = m.endpoint;
  c.request_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(m.timeout_s * 1000));
  if (c.provider == ProviderKind::synthetic) {
    c.model_name = m.model.empty() ? "synthetic" : m.model;
    SyntheticSpec s;
    if (!m.synthetic_spec.empty()) {
      s = load_synthetic_spec(m.synthetic_spec, design);
    } else {
      s.intercept = kDefaultIntercept;
      s.coefficients = design.factors.size() == kDefaultCoefficients.size()
                           ? kDefaultCoefficients
                           : std::vector<double>(design.factors.size(), 0.0);
    }
    if (m.intercept) s.intercept = *m.intercept;
    if (!m.coefficients.empty()) s.coefficients = m.coefficients;
    if (m.noise > 0.0 || m.synthetic_spec.empty()) s.noise_sd = m.noise;
    if (m.granularity != 1 || m.synthetic_spec.empty()) s.granularity = m.granularity;
    if (m.refusal_rate > 0.0 || m.synthetic_spec.empty()) s.refusal_rate = m.refusal_rate;
    c.synthetic = std::move(s);
  } else {
    c.model_name = m.model.empty() ? "gpt-4o-mini" : m.model;
  }
  validate(c, design.factors.size());
  return c;
}

const char* kTimes = "\xC3\x97";  // U+00D7

std::string plan_line(std::size_t scenarios, std::size_t cells, std::uint32_t reps) {
  std::ostringstream s;
  s << scenarios << " scenarios " << kTimes << " " << cells << " cells " << kTimes << " " << reps
    << " reps = " << scenarios * cells * reps << " requests";
  return s.str();
}

std::vector<std::filesystem::path> to_paths(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

int cmd_plan(const DesignArgs& d, std::uint32_t reps, std::ostream& out) {
  const Design design = resolve_design(d);
  validate(design);
  std::size_t scenarios = design.scenarios.size();
  if (!d.scenarios.empty()) {
    for (const auto& id : d.scenarios) {
      if (design.scenario_index(id) == Design::npos) throw Error(ErrorCode::invalid_plan, "unknown scenario '" + id + "'");
    }
    scenarios = d.scenarios.size();
  }
  out << "design " << design_hash(design) << "\n";
  out << "factors (" << design.factors.size() << "):\n";
  for (const auto& f : design.factors) {
    out << "  " << f.id << ": " << f.prompt_label << " [" << f.high_text << " | " << f.low_text << "]\n";
  }
  out << "scenarios (" << design.scenarios.size() << "):\n";
  for (const auto& s : design.scenarios) out << "  " << s.id << ": " << s.title << "\n";
  out << plan_line(scenarios, design.cell_count(), reps) << "\n";
  return 0;
}

int cmd_run(const DesignArgs& d, const ModelArgs& m, const RunArgs& r, bool is_resume, std::ostream& out,
            std::ostream& err) {
  const Design design = resolve_design(d);
  ModelConfig model = resolve_model(m, design);
  RunPlan plan = build_plan(design, model, r.reps, m.seed.value_or(0), d.scenarios, r.experiment_id);
  plan.parallelism = r.parallelism;
  plan.retry_limit = r.retries;
  plan.rate_limit_per_minute = r.rate_limit;
  plan.backoff.base = std::chrono::milliseconds(r.backoff_base_ms);
  plan.prompt_style = d.html ? PromptStyle::html : PromptStyle::plain;

  // Credentials are checked before the store is touched.
  std::unique_ptr<Respondent> respondent = make_respondent(model);
  RecordStore store(r.store_path, RecordStore::Options{r.fsync});

  ExecutionOptions options;
  auto last = std::chrono::steady_clock::now() - std::chrono::seconds(10);
  if (!r.quiet) {
    options.progress = [&](const ProgressEvent& e) {
      const auto now = std::chrono::steady_clock::now();
      if (e.done == e.total || now - last >= std::chrono::seconds(1)) {
        last = now;
        err << "progress " << e.done << "/" << e.total << " failed " << e.failed << " refused " << e.refused << "\n";
      }
    };
  }
  const ExecutionSummary s = is_resume ? resume(plan, store, *respondent, options)
                                       : execute(plan, store, *respondent, options);
  out << "experiment " << plan.experiment_id << "\n"
      << plan_line(plan.scenario_ids.size(), plan.cell_count(), plan.reps_per_cell) << "\n"
      << "already complete " << s.already_complete << ", new records " << s.new_records << " (ok " << s.ok
      << ", refused " << s.refused << ", failed " << s.failed << "), requests " << s.requests_issued
      << ", latency " << s.total_latency_ms << " ms\n";
  return 0;
}

int cmd_validate(const std::vector<std::string>& stores, std::optional<std::uint32_t> reps, bool keep_last,
                 std::ostream& out) {
  const Dataset ds = load_dataset(to_paths(stores), LoadOptions{keep_last});
  std::uint32_t expected = 0;
  if (reps) {
    expected = *reps;
  } else {
    for (const auto& e : ds.experiments) expected = std::max(expected, e.reps_per_cell);
  }
  const BalanceVerdict v = validate_balance(ds, expected);
  std::size_t refused = 0, failed = 0;
  for (const auto& c : ds.balance_report) {
    refused += c.refused;
    failed += c.failed;
  }
  out << ds.observations.size() << " scored observations in " << ds.balance_report.size() << " cells; refused "
      << refused << ", failed " << failed << "\n";
  if (v.balanced) {
    out << "balanced: every cell has " << expected << " scored runs\n";
    return 0;
  }
  out << "imbalanced: " << v.imbalanced.size() << " cells differ from " << expected << " scored runs\n";
  for (const auto& c : v.imbalanced) {
    out << "  " << c.experiment_id << " " << c.scenario_id << " cell " << c.cell_index << ": ok " << c.ok
        << ", refused " << c.refused << ", failed " << c.failed << "\n";
  }
  return 1;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string describe(const ParseOutcome& o) {
  if (o.kind == ParseKind::score) return "score:" + std::to_string(*o.score);
  return std::string(to_string(o.kind));
}

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      const char c = s[++i];
      out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

int cmd_parse(const std::string& text, const std::string& file, const std::string& corpus, std::ostream& out) {
  if (!corpus.empty()) {
    std::istringstream lines(read_text_file(corpus));
    std::string line;
    std::size_t total = 0, failures = 0;
    while (std::getline(lines, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw Error(ErrorCode::invalid_input, "corpus line without a tab: " + line);
      const std::string expected = line.substr(0, tab);
      const std::string got = describe(parse_score(unescape(line.substr(tab + 1))));
      ++total;
      if (got != expected) {
        ++failures;
        out << "MISMATCH expected " << expected << " got " << got << ": " << line.substr(tab + 1) << "\n";
      }
    }
    out << (total - failures) << "/" << total << " corpus cases pass\n";
    return failures == 0 ? 0 : 1;
  }
  const std::string input = file.empty() ? text : read_text_file(file);
  const ParseOutcome o = parse_score(input);
  out << describe(o) << " rule " << o.rule << " span " << o.matched_span.begin << ".." << o.matched_span.end << "\n";
  return 0;
}

int cmd_cost(const DesignArgs& d, const ModelArgs& m, std::uint32_t reps, std::optional<std::uint64_t> prompt_tokens,
             std::uint64_t output_tokens, const std::string& pricing_path, std::ostream& out) {
  const Design design = resolve_design(d);
  const ModelConfig model = resolve_model(m, design);
  const RunPlan plan = build_plan(design, model, reps, 0, d.scenarios);
  std::uint64_t mean_prompt = 0;
  if (prompt_tokens) {
    mean_prompt = *prompt_tokens;
  } else {
    // About four bytes per token for English text.
    std::uint64_t bytes = 0;
    for (const auto& s : plan.scenario_ids) {
      bytes += render_vignette(design, design.scenario_index(s), 0).prompt.size();
    }
    mean_prompt = bytes / plan.scenario_ids.size() / 4;
  }
  const PricingTable pricing = pricing_path.empty() ? PricingTable{} : load_pricing(pricing_path);
  const CostReport c = estimate_cost(plan.total_requests(), model, mean_prompt, output_tokens, pricing);
  out << "requests " << c.requests << "\n"
      << "prompt tokens " << c.prompt_tokens << " (" << mean_prompt << " per request)\n"
      << "output tokens " << c.output_tokens << " (" << output_tokens << " per request)\n";
  if (c.usd) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", *c.usd);
    out << "estimated cost USD " << buf << "\n";
  } else {
    out << "estimated cost unknown (no price for " << model.model_name << ")\n";
  }
  return 0;
}

constexpr const char* kCredentialHelp =
    "Credentials come from the environment only: OPENAI_API_KEY (openai), "
    "ANTHROPIC_API_KEY (anthropic), GEMINI_API_KEY (gemini).";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factorial vignette experiments against chat models, with cluster-robust analysis.", "conjoint"};
  app.footer(kCredentialHelp);
  app.require_subcommand(1, 1);

  DesignArgs design_args;
  ModelArgs model_args;
  RunArgs run_args;
  std::vector<std::string> stores;
  std::string out_path;
  bool keep_last = false;
  std::optional<std::uint32_t> expected_reps;
  int bin_width = 5;
  std::vector<std::string> split_factors;
  std::uint32_t reps = 100;

  auto* plan = app.add_subcommand("plan", "Print the design summary and request count");
  add_design_options(plan, design_args);
  plan->add_option("--reps", reps, "Repetitions per vignette")->check(CLI::PositiveNumber);

  auto add_run = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    add_design_options(cmd, design_args);
    add_model_options(cmd, model_args);
    cmd->add_option("--reps", run_args.reps, "Repetitions per vignette")->check(CLI::PositiveNumber);
    cmd->add_option("--parallelism", run_args.parallelism, "Concurrent requests")->check(CLI::PositiveNumber);
    cmd->add_option("--retries", run_args.retries, "Retries per run key")->check(CLI::NonNegativeNumber);
    cmd->add_option("--store-path,--store", run_args.store_path, "Record file (line-delimited JSON)")->required();
    cmd->add_option("--rate-limit", run_args.rate_limit, "Requests per minute for network providers (0 = off)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--experiment-id", run_args.experiment_id, "Experiment id (default <model>-seed<seed>)");
    cmd->add_option("--backoff-base-ms", run_args.backoff_base_ms, "Initial retry backoff")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--fsync", run_args.fsync, "fsync after every record");
    cmd->add_flag("--quiet", run_args.quiet, "No progress lines");
    cmd->footer(kCredentialHelp);
    return cmd;
  };
  auto* run_cmd = add_run("run", "Execute a run plan, appending records to the store");
  auto* resume_cmd = add_run("resume", "Continue an interrupted run (refuses a store of another experiment)");

  auto* validate_cmd = app.add_subcommand("validate", "Check that every cell has the expected number of scored runs");
  validate_cmd->add_option("--store,--store-path", stores, "Record files")->required();
  validate_cmd->add_option("--reps", expected_reps, "Expected scored runs per cell (default: planned reps)");
  validate_cmd->add_flag("--keep-last", keep_last, "Resolve duplicate keys by keeping the later record");

  std::string reparse_in;
  auto* reparse_cmd = app.add_subcommand("reparse", "Re-score raw texts with the current parser into a new store");
  reparse_cmd->add_option("--store,--store-path", reparse_in, "Source record file")->required();
  reparse_cmd->add_option("--out", out_path, "Target record file")->required();

  auto* analyze_cmd = app.add_subcommand("analyze", "Run every estimator and print machine-readable JSON");
  analyze_cmd->add_option("--store,--store-path", stores, "Record files to pool")->required();
  analyze_cmd->add_option("--out", out_path, "Write JSON here instead of stdout");
  analyze_cmd->add_flag("--keep-last", keep_last, "Resolve duplicate keys by keeping the later record");
  analyze_cmd->add_option("--bin-width", bin_width, "Histogram bin width")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--split", split_factors, "Factor ids for split-sample regressions");

  auto* report_cmd = app.add_subcommand("report", "Write formatted tables and figure data");
  report_cmd->add_option("--store,--store-path", stores, "Record files to pool")->required();
  report_cmd->add_option("--out", out_path, "Output directory")->required();
  report_cmd->add_flag("--keep-last", keep_last, "Resolve duplicate keys by keeping the later record");
  report_cmd->add_option("--bin-width", bin_width, "Histogram bin width")->check(CLI::PositiveNumber);
  report_cmd->add_option("--split", split_factors, "Factor ids for split-sample regressions");

  auto* export_cmd = app.add_subcommand("export", "Export scored observations as CSV");
  export_cmd->add_option("--store,--store-path", stores, "Record files to pool")->required();
  export_cmd->add_option("--out", out_path, "CSV path")->required();
  export_cmd->add_flag("--keep-last", keep_last, "Resolve duplicate keys by keeping the later record");

  std::string parse_text, parse_file, parse_corpus;
  auto* parse_cmd = app.add_subcommand("parse", "Show how the score parser reads a text");
  auto* text_opt = parse_cmd->add_option("--text", parse_text, "Raw model text");
  auto* file_opt = parse_cmd->add_option("--file", parse_file, "File holding raw model text")->check(CLI::ExistingFile);
  auto* corpus_opt = parse_cmd->add_option("--corpus", parse_corpus, "Check a golden corpus (expected<TAB>text per line)")
                         ->check(CLI::ExistingFile);
  text_opt->excludes(file_opt)->excludes(corpus_opt);
  file_opt->excludes(corpus_opt);

  std::optional<std::uint64_t> prompt_tokens;
  std::uint64_t output_tokens = 10;
  std::string pricing_path;
  auto* cost_cmd = app.add_subcommand("cost", "Estimate request count, tokens and price of a plan");
  add_design_options(cost_cmd, design_args);
  add_model_options(cost_cmd, model_args);
  cost_cmd->add_option("--reps", reps, "Repetitions per vignette")->check(CLI::PositiveNumber);
  cost_cmd->add_option("--prompt-tokens", prompt_tokens, "Mean prompt tokens (default: estimated from the prompts)");
  cost_cmd->add_option("--output-tokens", output_tokens, "Mean output tokens");
  cost_cmd->add_option("--pricing", pricing_path, "Pricing file (JSON: model -> per-million prices)")
      ->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (e.get_exit_code() != 0) err << app.help();
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (plan->parsed()) return cmd_plan(design_args, reps, out);
    if (run_cmd->parsed()) return cmd_run(design_args, model_args, run_args, false, out, err);
    if (resume_cmd->parsed()) return cmd_run(design_args, model_args, run_args, true, out, err);
    if (validate_cmd->parsed()) return cmd_validate(stores, expected_reps, keep_last, out);
    if (reparse_cmd->parsed()) {
      const std::size_t n = reparse_store(reparse_in, out_path);
      out << "re-scored " << n << " records into " << out_path << "\n";
      return 0;
    }
    if (analyze_cmd->parsed() || report_cmd->parsed()) {
      const Dataset ds = load_dataset(to_paths(stores), LoadOptions{keep_last});
      AnalysisOptions options;
      options.bin_width = bin_width;
      options.split_factors = split_factors;
      const Analysis a = analyze(ds, options);
      if (a.uncertainty_skipped) err << "uncertainty regression skipped: " << *a.uncertainty_skipped << "\n";
      if (analyze_cmd->parsed()) {
        const std::string text = analysis_to_json(a, ds) + "\n";
        if (out_path.empty()) {
          out << text;
        } else {
          std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
          if (!f || !(f << text)) throw Error(ErrorCode::io, "cannot write " + out_path);
        }
        return 0;
      }
      const auto files = write_report(a, ds, out_path);
      out << "wrote " << files.size() << " files under " << out_path << "\n";
      return 0;
    }
    if (export_cmd->parsed()) {
      const Dataset ds = load_dataset(to_paths(stores), LoadOptions{keep_last});
      const std::size_t rows = export_csv(ds, out_path);
      out << "exported " << rows << " rows to " << out_path << "\n";
      return 0;
    }
    if (parse_cmd->parsed()) return cmd_parse(parse_text, parse_file, parse_corpus, out);
    if (cost_cmd->parsed()) {
      return cmd_cost(design_args, model_args, reps, prompt_tokens, output_tokens, pricing_path, out);
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return is_runtime_failure(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace conjoint::cli
