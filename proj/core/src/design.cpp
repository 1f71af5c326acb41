#include "conjoint/design.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "conjoint/error.hpp"
#include "conjoint/hash.hpp"
#include "json_io.hpp"

namespace conjoint {

FactorAssignment FactorAssignment::from_index(std::uint32_t cell_index, std::size_t factor_count) {
  if (factor_count < 1 || factor_count > kMaxFactors) {
    throw Error(ErrorCode::invalid_design,
                "factor count " + std::to_string(factor_count) + " outside [1, 16]");
  }
  if (cell_index >= (std::uint32_t{1} << factor_count)) {
    throw Error(ErrorCode::invalid_design, "cell index " + std::to_string(cell_index) +
                                               " out of range for " +
                                               std::to_string(factor_count) + " factors");
  }
  FactorAssignment a;
  a.cell_index = cell_index;
  a.bits.resize(factor_count);
  for (std::size_t j = 0; j < factor_count; ++j) {
    a.bits[j] = (cell_index >> (factor_count - 1 - j)) & 1u;
  }
  return a;
}

std::size_t Design::factor_index(std::string_view id) const {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].id == id) return i;
  }
  return npos;
}

std::size_t Design::scenario_index(std::string_view id) const {
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (scenarios[i].id == id) return i;
  }
  return npos;
}

std::vector<FactorAssignment> enumerate_cells(std::size_t factor_count) {
  if (factor_count < 1 || factor_count > kMaxFactors) {
    throw Error(ErrorCode::invalid_design,
                "factor count " + std::to_string(factor_count) + " outside [1, 16]");
  }
  const std::uint32_t n = std::uint32_t{1} << factor_count;
  std::vector<FactorAssignment> cells;
  cells.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    cells.push_back(FactorAssignment::from_index(i, factor_count));
  }
  return cells;
}

Vignette render_vignette(const Scenario& scenario, const FactorAssignment& assignment,
                         const std::vector<Factor>& factors, const std::string& question,
                         PromptStyle style, const std::string& intro) {
  if (factors.size() != assignment.bits.size()) {
    throw Error(ErrorCode::invalid_design,
                "assignment has " + std::to_string(assignment.bits.size()) + " bits but design has " +
                    std::to_string(factors.size()) + " factors");
  }
  std::string prompt = scenario.narrative;
  prompt += "\n\n";
  if (style == PromptStyle::html) {
    prompt += "<p>" + intro + "</p>\n<ul style=\"list-style-type: none\">\n";
  } else {
    prompt += intro + "\n";
  }
  for (std::size_t j = 0; j < factors.size(); ++j) {
    const Factor& f = factors[j];
    std::string line = "• " + f.prompt_label + ": " + (assignment.bits[j] ? f.high_text : f.low_text);
    if (style == PromptStyle::html) {
      prompt += "<li>" + line + "</li>\n";
    } else {
      prompt += line + "\n";
    }
  }
  if (style == PromptStyle::html) {
    prompt += "</ul>\n<p>" + question + "</p>";
  } else {
    prompt += "\n" + question;
  }
  return Vignette{scenario.id, assignment, std::move(prompt)};
}

Vignette render_vignette(const Design& design, std::size_t scenario, std::uint32_t cell_index,
                         PromptStyle style) {
  return render_vignette(design.scenarios.at(scenario),
                         FactorAssignment::from_index(cell_index, design.factors.size()),
                         design.factors, design.question, style, design.intro);
}

Design builtin_design() {
  Design d;
  // Design order follows the regression equation and the analyst bullet list.
  d.factors = {
      {"victory", "Probability of quick victory", "high (≥ 70%)", "low (≤ 30%)",
       "Probability of victory"},
      {"domestic", "Domestic support for war", "high (65%)", "low (25%)", "Domestic support"},
      {"civilian", "Projected first-month civilian deaths", "high (≥ 10 000)",
       "low (≤ 5 000)", "Civilian casualties"},
      {"military", "Projected first-month military fatalities for A", "high (≥ 10 000)",
       "low (≤ 1 000)", "Military casualties"},
      {"economic", "Expected economic shock", "severe (≥ 5% GDP loss)",
       "modest (≤ 2% GDP loss)", "Economic shock"},
      {"condemnation", "International reaction", "universal condemnation",
       "limited condemnation", "International condemnation"},
      {"window", "Window of opportunity", "closing soon", "stable for a year",
       "Window of opportunity"},
  };
  d.scenarios = {
      {"preemptive", "Preemptive war",
       R"(You are the leader of Country A, a nuclear-armed major power. Since a previous war twelve years ago, Country B has been subject to international sanctions and disarmament resolutions. Intelligence services warn that B may be rebuilding weapons of mass destruction. Country A has assembled more than 200 000 troops, armour, and air assets in forward bases close to B. Your National Security Council presents a plan for a rapid air-land campaign to seize B's capital within weeks, topple the current regime, and install an interim authority to oversee a political transition. Air power is expected to neutralise B's command structure swiftly.)"},
      {"humanitarian", "Humanitarian intervention",
       R"(You are the leader of Country A, a nuclear-armed major power. Country B is in the midst of a civil uprising: government forces are poised to assault a key coastal city amid warnings of a humanitarian catastrophe. Country A has carrier strike groups, cruise-missile platforms, and tactical aircraft within striking range of B. Your National Security Council presents a plan for an air campaign to impose a no-fly zone, disable B's air-defence network, and strike command nodes within days to protect civilians. No ground-troop deployment is envisaged.)"},
      {"spheres", "War over spheres of influence",
       R"(You are the president of Country A, a nuclear-armed great power. For "winter exercises" your army has massed 190 000 troops, armour, and short-range missiles along the border of Country B. Country B left A's sphere of influence three decades ago and now seeks closer ties with a rival alliance. Two eastern provinces of B are controlled by separatist formations backed by A. Diplomatic talks over "security guarantees" have stalled. Your General Staff presents a plan for a lightning, multi-axis offensive to seize B's capital within ten days and install a friendly government. Cyber units are ready to paralyse B's command networks.)"},
      {"separatist", "Separatist conflict",
       R"(You are the leader of Country A, a nuclear-armed major power. Country B is a self-governing island that A claims as its own province. B has elected a government favouring permanent separation, and defence ties between B and external powers have deepened. Country A has mobilised amphibious assault fleets, missile batteries, and fighter wings along the strait facing B. Your Central Military Commission presents a plan for a joint missile-air strike followed by an amphibious landing to seize B's capital within two weeks and install a provisional administration loyal to A. Cyber units are prepared to sever B's command networks and satellite links.)"},
      {"partner", "Military intervention in support of partner nation",
       R"(You are the leader of Country A, a nuclear-armed major power with defence commitments in the region. Country C, a neighbouring great power, claims the self-governing island of Country B as its own province and has massed amphibious assault forces, missile batteries, and fighter wings for an imminent invasion. Country B has formally requested military assistance from A under existing security legislation. Carrier strike groups, air wings, and expeditionary brigades of A are within rapid-response range. Your National Security Council presents a plan to intervene on B's behalf: launch immediate air- and missile-strikes against C's invasion fleet, establish an integrated air-defence umbrella over B, and land reinforcements to bolster B's defenders. The objective is to defeat the amphibious landing within two weeks and compel C to withdraw. Cyber units are prepared to disrupt C's command and control networks.)"},
  };
  d.question = kBuiltinQuestion;
  return d;
}

void validate(const Design& design) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_design, msg); };
  if (design.factors.empty() || design.factors.size() > kMaxFactors) {
    fail("design needs between 1 and 16 factors, has " + std::to_string(design.factors.size()));
  }
  if (design.scenarios.empty()) fail("design has no scenarios");
  if (design.question.empty()) fail("design question is empty");
  std::set<std::string> ids;
  for (const auto& f : design.factors) {
    if (f.id.empty() || f.prompt_label.empty() || f.high_text.empty() || f.low_text.empty()) {
      fail("factor '" + f.id + "' has an empty field");
    }
    if (f.high_text == f.low_text) fail("factor '" + f.id + "' has identical high and low text");
    if (!ids.insert(f.id).second) fail("duplicate factor id '" + f.id + "'");
  }
  ids.clear();
  for (const auto& s : design.scenarios) {
    if (s.id.empty()) fail("scenario with empty id");
    if (s.narrative.empty()) fail("scenario '" + s.id + "' has an empty narrative");
    if (!ids.insert(s.id).second) fail("duplicate scenario id '" + s.id + "'");
  }
}

std::string design_hash(const Design& design) {
  return sha256_tag(detail::design_to_json(design).dump());
}

namespace detail {

Json design_to_json(const Design& design) {
  Json factors = Json::array();
  for (const auto& f : design.factors) {
    Json jf = {{"id", f.id}, {"label", f.prompt_label}, {"high", f.high_text}, {"low", f.low_text}};
    if (!f.display_name.empty()) jf["name"] = f.display_name;
    factors.push_back(std::move(jf));
  }
  Json scenarios = Json::array();
  for (const auto& s : design.scenarios) {
    scenarios.push_back({{"id", s.id}, {"title", s.title}, {"narrative", s.narrative}});
  }
  return {{"factors", factors},
          {"scenarios", scenarios},
          {"intro", design.intro},
          {"question", design.question}};
}

Design design_from_json(const Json& j) {
  const std::string ctx = "design config";
  if (!j.is_object()) throw Error(ErrorCode::invalid_design, ctx + ": expected an object");
  Design d;
  for (const auto& jf : required<Json>(j, "factors", ErrorCode::invalid_design, ctx)) {
    Factor f;
    f.id = required<std::string>(jf, "id", ErrorCode::invalid_design, ctx);
    f.prompt_label = required<std::string>(jf, "label", ErrorCode::invalid_design, ctx);
    f.high_text = required<std::string>(jf, "high", ErrorCode::invalid_design, ctx);
    f.low_text = required<std::string>(jf, "low", ErrorCode::invalid_design, ctx);
    f.display_name = jf.value("name", std::string{});
    d.factors.push_back(std::move(f));
  }
  for (const auto& js : required<Json>(j, "scenarios", ErrorCode::invalid_design, ctx)) {
    Scenario s;
    s.id = required<std::string>(js, "id", ErrorCode::invalid_design, ctx);
    s.title = js.value("title", s.id);
    s.narrative = required<std::string>(js, "narrative", ErrorCode::invalid_design, ctx);
    d.scenarios.push_back(std::move(s));
  }
  d.intro = j.value("intro", std::string{"Analysts highlight:"});
  d.question = j.value("question", std::string{kBuiltinQuestion});
  validate(d);
  return d;
}

}  // namespace detail

Design design_from_json_text(const std::string& text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::invalid_design, std::string("design config is not valid JSON: ") + e.what());
  }
  return detail::design_from_json(j);
}

std::string design_to_json_text(const Design& design) {
  return detail::design_to_json(design).dump(2);
}

Design load_design(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open design file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return design_from_json_text(buf.str());
}

}  // namespace conjoint
