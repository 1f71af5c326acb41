#include "conjoint/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "conjoint/error.hpp"
#include "json_io.hpp"

namespace conjoint {

using detail::Json;
using detail::required;

std::string RunKey::to_string() const {
  return experiment_id + "/" + model_name + "/" + scenario_id + "/" + std::to_string(cell_index) +
         "/" + std::to_string(rep_index);
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::ok: return "ok";
    case RunStatus::refused: return "refused";
    case RunStatus::failed: return "failed";
  }
  return "failed";
}

RunStatus run_status_from_string(std::string_view s) {
  if (s == "ok") return RunStatus::ok;
  if (s == "refused") return RunStatus::refused;
  if (s == "failed") return RunStatus::failed;
  throw Error(ErrorCode::invalid_input, "unknown run status '" + std::string(s) + "'");
}

ParseOutcome classify_response(FinishStatus finish, std::string_view text) {
  switch (finish) {
    case FinishStatus::complete: return parse_score(text);
    case FinishStatus::refused_by_api: {
      ParseOutcome o;
      o.kind = ParseKind::refusal;
      o.rule = 5;
      return o;
    }
    case FinishStatus::truncated:
    case FinishStatus::transport_error: break;
  }
  return ParseOutcome{};
}

RunStatus status_for(const ParseOutcome& outcome) {
  switch (outcome.kind) {
    case ParseKind::score: return RunStatus::ok;
    case ParseKind::refusal: return RunStatus::refused;
    case ParseKind::unparseable: break;
  }
  return RunStatus::failed;
}

// --- serialization ---------------------------------------------------------

namespace {

Json model_to_json(const ModelConfig& m) {
  Json j = {{"provider", to_string(m.provider)},
            {"model_name", m.model_name},
            {"temperature", m.temperature},
            {"max_output_tokens", m.max_output_tokens},
            {"seed", m.seed ? Json(*m.seed) : Json(nullptr)},
            {"endpoint_url", m.endpoint_url ? Json(*m.endpoint_url) : Json(nullptr)}};
  if (m.synthetic) {
    const auto& s = *m.synthetic;
    Json inter = Json::array();
    for (const auto& t : s.interactions) inter.push_back({t.first, t.second, t.coefficient});
    j["synthetic"] = {{"intercept", s.intercept},       {"coefficients", s.coefficients},
                      {"noise_sd", s.noise_sd},         {"granularity", s.granularity},
                      {"refusal_rate", s.refusal_rate}, {"noise_sd_shift", s.noise_sd_shift},
                      {"interactions", inter}};
  }
  return j;
}

ModelConfig model_from_json(const Json& j) {
  const std::string ctx = "store header model";
  ModelConfig m;
  m.provider = provider_kind_from_string(required<std::string>(j, "provider", ErrorCode::io, ctx));
  m.model_name = required<std::string>(j, "model_name", ErrorCode::io, ctx);
  m.temperature = j.value("temperature", 1.0);
  m.max_output_tokens = j.value("max_output_tokens", 64);
  if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::int64_t>();
  if (j.contains("endpoint_url") && !j["endpoint_url"].is_null()) {
    m.endpoint_url = j["endpoint_url"].get<std::string>();
  }
  if (j.contains("synthetic") && !j["synthetic"].is_null()) {
    const auto& js = j["synthetic"];
    SyntheticSpec s;
    s.intercept = js.value("intercept", 0.0);
    s.coefficients = js.value("coefficients", std::vector<double>{});
    s.noise_sd = js.value("noise_sd", 0.0);
    s.granularity = js.value("granularity", 1);
    s.refusal_rate = js.value("refusal_rate", 0.0);
    s.noise_sd_shift = js.value("noise_sd_shift", std::vector<double>{});
    for (const auto& t : js.value("interactions", Json::array())) {
      s.interactions.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(), t.at(2).get<double>()});
    }
    m.synthetic = std::move(s);
  }
  return m;
}

Json optional_string(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

ExperimentHeader header_from_json(const Json& j) {
  const std::string ctx = "store header";
  ExperimentHeader h;
  h.experiment_id = required<std::string>(j, "experiment_id", ErrorCode::io, ctx);
  h.model = model_from_json(required<Json>(j, "model", ErrorCode::io, ctx));
  h.design = detail::design_from_json(required<Json>(j, "design", ErrorCode::io, ctx));
  h.design_hash = required<std::string>(j, "design_hash", ErrorCode::io, ctx);
  h.scenario_ids = required<std::vector<std::string>>(j, "scenarios", ErrorCode::io, ctx);
  h.reps_per_cell = required<std::uint32_t>(j, "reps_per_cell", ErrorCode::io, ctx);
  h.experiment_seed = j.value("experiment_seed", std::int64_t{0});
  h.prompt_style = j.value("prompt_style", std::string{"plain"}) == "html" ? PromptStyle::html : PromptStyle::plain;
  return h;
}

RunRecord record_from_json(const Json& j) {
  const std::string ctx = "run record";
  RunRecord r;
  r.key.experiment_id = required<std::string>(j, "experiment_id", ErrorCode::io, ctx);
  r.key.model_name = required<std::string>(j, "model", ErrorCode::io, ctx);
  r.key.scenario_id = required<std::string>(j, "scenario", ErrorCode::io, ctx);
  r.key.cell_index = required<std::uint32_t>(j, "cell", ErrorCode::io, ctx);
  r.key.rep_index = required<std::uint32_t>(j, "rep", ErrorCode::io, ctx);
  r.prompt_hash = j.value("prompt_hash", std::string{});
  r.raw_text = j.value("raw_text", std::string{});
  r.finish_status = finish_status_from_string(required<std::string>(j, "finish_status", ErrorCode::io, ctx));
  const Json& p = required<Json>(j, "parse", ErrorCode::io, ctx);
  r.parse.kind = parse_kind_from_string(required<std::string>(p, "kind", ErrorCode::io, ctx));
  if (p.contains("score") && !p["score"].is_null()) r.parse.score = p["score"].get<int>();
  if (auto span = p.find("span"); span != p.end() && span->is_array() && span->size() == 2) {
    r.parse.matched_span = {(*span)[0].get<std::size_t>(), (*span)[1].get<std::size_t>()};
  }
  r.parse.rule = p.value("rule", 6);
  r.parser_version = p.value("parser_version", kParserVersion);
  r.status = run_status_from_string(required<std::string>(j, "status", ErrorCode::io, ctx));
  r.attempt_count = j.value("attempts", 0);
  if (j.contains("started_at") && !j["started_at"].is_null()) r.started_at = j["started_at"].get<std::string>();
  if (j.contains("finished_at") && !j["finished_at"].is_null()) r.finished_at = j["finished_at"].get<std::string>();
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  r.provider_metadata = j.value("metadata", std::map<std::string, std::string>{});
  if ((r.status == RunStatus::ok) != (r.parse.kind == ParseKind::score)) {
    throw Error(ErrorCode::io, "run record " + r.key.to_string() + ": status ok must coincide with a score");
  }
  if (r.parse.kind == ParseKind::score && (!r.parse.score || *r.parse.score < 0 || *r.parse.score > 100)) {
    throw Error(ErrorCode::io, "run record " + r.key.to_string() + ": score out of range");
  }
  return r;
}

}  // namespace

std::string serialize(const ExperimentHeader& h) {
  Json j = {{"type", "header"},
            {"schema_version", kStoreSchemaVersion},
            {"experiment_id", h.experiment_id},
            {"model", model_to_json(h.model)},
            {"design", detail::design_to_json(h.design)},
            {"design_hash", h.design_hash},
            {"scenarios", h.scenario_ids},
            {"reps_per_cell", h.reps_per_cell},
            {"experiment_seed", h.experiment_seed},
            {"prompt_style", h.prompt_style == PromptStyle::html ? "html" : "plain"}};
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

std::string serialize(const RunRecord& r) {
  Json parse = {{"kind", to_string(r.parse.kind)},
                {"score", r.parse.score ? Json(*r.parse.score) : Json(nullptr)},
                {"span", {r.parse.matched_span.begin, r.parse.matched_span.end}},
                {"rule", r.parse.rule},
                {"parser_version", r.parser_version}};
  Json j = {{"type", "run"},
            {"schema_version", kStoreSchemaVersion},
            {"experiment_id", r.key.experiment_id},
            {"model", r.key.model_name},
            {"scenario", r.key.scenario_id},
            {"cell", r.key.cell_index},
            {"rep", r.key.rep_index},
            {"prompt_hash", r.prompt_hash},
            {"raw_text", r.raw_text},
            {"finish_status", to_string(r.finish_status)},
            {"parse", parse},
            {"status", to_string(r.status)},
            {"attempts", r.attempt_count},
            {"started_at", optional_string(r.started_at)},
            {"finished_at", optional_string(r.finished_at)},
            {"latency_ms", r.latency_ms},
            {"metadata", r.provider_metadata}};
  // Provider text is not guaranteed to be valid UTF-8.
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

namespace {

enum class LineType { header, run };

std::pair<LineType, Json> parse_line(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::io, std::string("malformed store line: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::io, "malformed store line: not an object");
  const int version = j.value("schema_version", 0);
  if (version != kStoreSchemaVersion) {
    throw Error(ErrorCode::io, "unsupported store schema_version " + std::to_string(version));
  }
  const std::string type = j.value("type", std::string{});
  if (type == "header") return {LineType::header, std::move(j)};
  if (type == "run") return {LineType::run, std::move(j)};
  throw Error(ErrorCode::io, "unknown store line type '" + type + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open store " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Splits on '\n'. A final unterminated fragment is reported separately: it is a
// torn write if it does not parse.
struct Lines {
  std::vector<std::string> complete;
  std::string tail;
};

Lines split_lines(const std::string& data) {
  Lines out;
  std::size_t start = 0;
  while (start < data.size()) {
    const std::size_t nl = data.find('\n', start);
    if (nl == std::string::npos) {
      out.tail = data.substr(start);
      break;
    }
    if (nl > start) out.complete.push_back(data.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

StoreContents parse_contents(const std::string& data, const std::filesystem::path& path,
                             const LoadOptions& options) {
  Lines lines = split_lines(data);
  if (!lines.tail.empty()) {
    try {
      parse_line(lines.tail);
      lines.complete.push_back(lines.tail);
    } catch (const Error&) {
      // torn trailing write; ignored
    }
  }
  StoreContents out;
  std::map<RunKey, std::size_t> seen;
  std::size_t line_no = 0;
  for (const auto& line : lines.complete) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      auto [type, j] = parse_line(line);
      if (type == LineType::header) {
        if (out.header || !out.records.empty()) throw Error(ErrorCode::io, "header must be the first line");
        out.header = header_from_json(j);
        continue;
      }
      if (!out.header) throw Error(ErrorCode::io, "run record before header");
      RunRecord r = record_from_json(j);
      if (r.key.experiment_id != out.header->experiment_id) {
        throw Error(ErrorCode::experiment_mismatch,
                    "record experiment '" + r.key.experiment_id + "' differs from header '" +
                        out.header->experiment_id + "'");
      }
      if (auto it = seen.find(r.key); it != seen.end()) {
        if (!options.keep_last) {
          throw Error(ErrorCode::corrupt_duplicate, "duplicate run key " + r.key.to_string());
        }
        out.records[it->second] = std::move(r);
      } else {
        seen.emplace(r.key, out.records.size());
        out.records.push_back(std::move(r));
      }
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  }
  return out;
}

std::string errno_message(const std::string& what, const std::filesystem::path& path) {
  return what + " " + path.string() + ": " + std::strerror(errno);
}

}  // namespace

RunRecord parse_record_line(const std::string& line) {
  auto [type, j] = parse_line(line);
  if (type != LineType::run) throw Error(ErrorCode::io, "expected a run record line");
  return record_from_json(j);
}

StoreContents read_store(const std::filesystem::path& path, const LoadOptions& options) {
  return parse_contents(read_file(path), path, options);
}

// --- RecordStore -----------------------------------------------------------

RecordStore::RecordStore(std::filesystem::path path, Options options)
    : path_(std::move(path)), options_(options) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::io, errno_message("cannot open store", path_));

  std::string data = read_file(path_);
  // Drop a torn trailing write so the next append starts on a fresh line.
  if (!data.empty() && data.back() != '\n') {
    const std::size_t keep = data.rfind('\n') == std::string::npos ? 0 : data.rfind('\n') + 1;
    if (::ftruncate(fd_, static_cast<off_t>(keep)) != 0) {
      const std::string msg = errno_message("cannot truncate torn tail of", path_);
      ::close(fd_);
      throw Error(ErrorCode::io, msg);
    }
    data.resize(keep);
  }
  try {
    StoreContents contents = parse_contents(data, path_, LoadOptions{});
    header_ = std::move(contents.header);
    completed_.reserve(contents.records.size());
    for (const auto& r : contents.records) completed_.push_back(r.key);
  } catch (...) {
    ::close(fd_);
    throw;
  }
}

RecordStore::~RecordStore() {
  if (fd_ >= 0) ::close(fd_);
}

void RecordStore::write_line(const std::string& line) {
  struct stat st {};
  if (::fstat(fd_, &st) != 0) throw Error(ErrorCode::io, errno_message("cannot stat store", path_));
  const std::string payload = line + "\n";
  std::size_t written = 0;
  while (written < payload.size()) {
    const ssize_t n = ::write(fd_, payload.data() + written, payload.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string msg = errno_message("write failed on store", path_);
      if (written > 0 && ::ftruncate(fd_, st.st_size) != 0) {
        // The torn tail is dropped on the next open.
      }
      throw Error(ErrorCode::io, msg);
    }
    written += static_cast<std::size_t>(n);
  }
  if (options_.fsync_each_record && ::fsync(fd_) != 0) {
    throw Error(ErrorCode::io, errno_message("fsync failed on store", path_));
  }
}

void RecordStore::ensure_header(const ExperimentHeader& header) {
  std::lock_guard lock(mutex_);
  if (header_) {
    if (header_->experiment_id != header.experiment_id) {
      throw Error(ErrorCode::experiment_mismatch,
                  "store " + path_.string() + " belongs to experiment '" + header_->experiment_id +
                      "', not '" + header.experiment_id + "'");
    }
    if (header_->design_hash != header.design_hash) {
      throw Error(ErrorCode::incompatible_design,
                  "store " + path_.string() + " was written for a different design");
    }
    return;
  }
  if (!completed_.empty()) throw Error(ErrorCode::io, "store has records but no header");
  write_line(serialize(header));
  header_ = header;
}

void RecordStore::append(const RunRecord& record) {
  const std::string line = serialize(record);
  std::lock_guard lock(mutex_);
  if (!header_) throw Error(ErrorCode::io, "cannot append to store " + path_.string() + " without a header");
  write_line(line);
  completed_.push_back(record.key);
}

std::vector<RunKey> RecordStore::completed_keys() const {
  std::lock_guard lock(mutex_);
  return completed_;
}

// --- datasets --------------------------------------------------------------

Dataset dataset_from_contents(const std::vector<StoreContents>& stores, const LoadOptions& options) {
  Dataset ds;
  const ExperimentHeader* first = nullptr;
  for (const auto& s : stores) {
    if (!s.header) continue;
    if (!first) {
      first = &*s.header;
      continue;
    }
    if (s.header->design_hash != first->design_hash) {
      throw Error(ErrorCode::incompatible_design,
                  "experiment '" + s.header->experiment_id + "' uses a different design than '" +
                      first->experiment_id + "'");
    }
  }
  if (!first) return ds;

  const Design& design = first->design;
  const std::size_t k = design.factors.size();
  const std::uint32_t cells = std::uint32_t{1} << k;
  ds.factors = design.factors;
  ds.design_hash = first->design_hash;

  // Planned scenarios across all experiments, kept in design order.
  std::set<std::size_t> planned;
  for (const auto& s : stores) {
    if (!s.header) continue;
    for (const auto& id : s.header->scenario_ids) {
      const std::size_t idx = design.scenario_index(id);
      if (idx == Design::npos) throw Error(ErrorCode::io, "header lists unknown scenario '" + id + "'");
      planned.insert(idx);
    }
  }
  std::map<std::size_t, std::uint32_t> scenario_slot;
  for (std::size_t idx : planned) {
    scenario_slot[idx] = static_cast<std::uint32_t>(ds.scenario_ids.size());
    ds.scenario_ids.push_back(design.scenarios[idx].id);
    ds.scenario_titles.push_back(design.scenarios[idx].title);
  }

  // Merge files by experiment id.
  struct Merged {
    std::uint32_t model = 0;
    std::set<std::uint32_t> scenarios;  // dataset slots
    std::map<RunKey, const RunRecord*> records;
  };
  std::map<std::string, std::uint32_t> experiment_slot;
  std::vector<Merged> merged;
  for (const auto& s : stores) {
    if (!s.header) continue;
    const auto& h = *s.header;
    auto [it, inserted] = experiment_slot.try_emplace(h.experiment_id, static_cast<std::uint32_t>(merged.size()));
    if (inserted) {
      auto m = std::find(ds.model_names.begin(), ds.model_names.end(), h.model.model_name);
      if (m == ds.model_names.end()) {
        ds.model_names.push_back(h.model.model_name);
        m = ds.model_names.end() - 1;
      }
      merged.push_back({static_cast<std::uint32_t>(m - ds.model_names.begin()), {}, {}});
      ds.experiments.push_back({h.experiment_id, h.model.model_name, h.reps_per_cell, h.experiment_seed});
    }
    Merged& target = merged[it->second];
    for (const auto& id : h.scenario_ids) target.scenarios.insert(scenario_slot.at(design.scenario_index(id)));
    for (const auto& r : s.records) {
      auto [rit, fresh] = target.records.try_emplace(r.key, &r);
      if (!fresh) {
        if (!options.keep_last) {
          throw Error(ErrorCode::corrupt_duplicate, "duplicate run key " + r.key.to_string() + " across store files");
        }
        rit->second = &r;
      }
    }
  }

  for (std::uint32_t e = 0; e < merged.size(); ++e) {
    const Merged& m = merged[e];
    const ExperimentInfo& info = ds.experiments[e];
    std::map<std::pair<std::uint32_t, std::uint32_t>, CellBalance> balance;
    for (std::uint32_t slot : m.scenarios) {
      for (std::uint32_t c = 0; c < cells; ++c) {
        balance[{slot, c}] = CellBalance{info.experiment_id, info.model_name, ds.scenario_ids[slot], c, 0, 0, 0};
      }
    }
    for (const auto& [key, rec] : m.records) {
      const std::size_t idx = design.scenario_index(key.scenario_id);
      if (idx == Design::npos || !scenario_slot.count(idx)) {
        throw Error(ErrorCode::io, "record " + key.to_string() + " refers to an unplanned scenario");
      }
      if (key.cell_index >= cells) throw Error(ErrorCode::io, "record " + key.to_string() + " has an invalid cell");
      const std::uint32_t slot = scenario_slot.at(idx);
      auto bit = balance.find({slot, key.cell_index});
      if (bit == balance.end()) {
        throw Error(ErrorCode::io, "record " + key.to_string() + " is outside its experiment's plan");
      }
      switch (rec->status) {
        case RunStatus::ok: {
          ++bit->second.ok;
          Observation o;
          o.score = *rec->parse.score;
          o.dummies.resize(k);
          for (std::size_t j = 0; j < k; ++j) o.dummies[j] = (key.cell_index >> (k - 1 - j)) & 1u;
          o.scenario = slot;
          o.model = m.model;
          o.cell = key.cell_index;
          o.cluster = ds.cluster_of(slot, key.cell_index);
          o.rep = key.rep_index;
          o.experiment = e;
          ds.observations.push_back(std::move(o));
          break;
        }
        case RunStatus::refused: ++bit->second.refused; break;
        case RunStatus::failed: ++bit->second.failed; break;
      }
    }
    for (auto& [_, b] : balance) ds.balance_report.push_back(std::move(b));
  }

  std::sort(ds.observations.begin(), ds.observations.end(), [](const Observation& a, const Observation& b) {
    return std::tie(a.experiment, a.scenario, a.cell, a.rep) < std::tie(b.experiment, b.scenario, b.cell, b.rep);
  });
  return ds;
}

Dataset load_dataset(const std::vector<std::filesystem::path>& store_paths, const LoadOptions& options) {
  if (store_paths.empty()) throw Error(ErrorCode::invalid_input, "no store paths given");
  std::vector<StoreContents> contents;
  contents.reserve(store_paths.size());
  for (const auto& p : store_paths) {
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::io, "store not found: " + p.string());
    contents.push_back(read_store(p, options));
  }
  return dataset_from_contents(contents, options);
}

BalanceVerdict validate_balance(const Dataset& dataset, std::uint32_t expected_reps) {
  BalanceVerdict v;
  for (const auto& cell : dataset.balance_report) {
    if (cell.ok != expected_reps) v.imbalanced.push_back(cell);
  }
  v.balanced = v.imbalanced.empty();
  return v;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

std::size_t export_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << "experiment_id,model,scenario,cell_index,rep,score";
  for (const auto& f : dataset.factors) out << ',' << csv_field(f.id);
  out << "\r\n";
  for (const auto& o : dataset.observations) {
    out << csv_field(dataset.experiments[o.experiment].experiment_id) << ','
        << csv_field(dataset.model_names[o.model]) << ',' << csv_field(dataset.scenario_ids[o.scenario]) << ','
        << o.cell << ',' << o.rep << ',' << o.score;
    for (auto d : o.dummies) out << ',' << static_cast<int>(d);
    out << "\r\n";
  }
  out.flush();
  if (!out) throw Error(ErrorCode::io, "write failed on " + path.string());
  return dataset.observations.size();
}

std::size_t reparse_store(const std::filesystem::path& source, const std::filesystem::path& target) {
  if (std::filesystem::exists(target) && std::filesystem::file_size(target) > 0) {
    throw Error(ErrorCode::invalid_input, "reparse target " + target.string() + " already has content");
  }
  if (!std::filesystem::exists(source)) throw Error(ErrorCode::io, "store not found: " + source.string());
  const StoreContents contents = read_store(source);
  if (!contents.header) throw Error(ErrorCode::invalid_input, "store " + source.string() + " has no header");
  RecordStore out(target);
  out.ensure_header(*contents.header);
  for (RunRecord r : contents.records) {
    r.parse = classify_response(r.finish_status, r.raw_text);
    r.parser_version = kParserVersion;
    r.status = status_for(r.parse);
    out.append(r);
  }
  return contents.records.size();
}

}  // namespace conjoint
