#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace conjoint {

/// One binary treatment variable of the factorial design.
struct Factor {
  std::string id;            // stable identifier, e.g. "victory"
  std::string prompt_label;  // analyst bullet label shown to the model
  std::string high_text;
  std::string low_text;
  std::string display_name;  // row label in reports; falls back to id when empty

  const std::string& name() const { return display_name.empty() ? id : display_name; }
};

/// A single cell of the full factorial design. bits[0] is the most significant
/// bit of cell_index, so cells enumerate in the natural binary order.
struct FactorAssignment {
  std::vector<bool> bits;
  std::uint32_t cell_index = 0;

  std::size_t factor_count() const { return bits.size(); }
  bool high(std::size_t factor) const { return bits.at(factor); }

  static FactorAssignment from_index(std::uint32_t cell_index, std::size_t factor_count);
};

struct Scenario {
  std::string id;
  std::string title;
  std::string narrative;
};

struct Vignette {
  std::string scenario_id;
  FactorAssignment assignment;
  std::string prompt;
};

enum class PromptStyle { plain, html };

struct Design {
  std::vector<Factor> factors;
  std::vector<Scenario> scenarios;
  std::string intro = "Analysts highlight:";
  std::string question;

  std::size_t cell_count() const { return std::size_t{1} << factors.size(); }
  std::size_t vignette_count() const { return scenarios.size() * cell_count(); }

  // Index of a factor/scenario id, or npos.
  std::size_t factor_index(std::string_view id) const;
  std::size_t scenario_index(std::string_view id) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

inline constexpr std::size_t kMaxFactors = 16;
inline constexpr const char* kBuiltinQuestion =
    "Do you order an invasion of Country B within one month? "
    "Answer 0-100 (100 = definitely invade, 0 = definitely not).";

// All 2^factor_count cells, ascending by cell_index.
std::vector<FactorAssignment> enumerate_cells(std::size_t factor_count);

Vignette render_vignette(const Scenario& scenario, const FactorAssignment& assignment,
                         const std::vector<Factor>& factors,
                         const std::string& question = kBuiltinQuestion,
                         PromptStyle style = PromptStyle::plain,
                         const std::string& intro = "Analysts highlight:");

Vignette render_vignette(const Design& design, std::size_t scenario, std::uint32_t cell_index,
                         PromptStyle style = PromptStyle::plain);

// Seven factors and five war scenarios, compiled in for exact replication.
Design builtin_design();

// Throws Error(invalid_design) on any broken invariant.
void validate(const Design& design);

// Stable content hash over factors, scenarios, intro and question.
std::string design_hash(const Design& design);

Design load_design(const std::filesystem::path& path);
Design design_from_json_text(const std::string& text);
std::string design_to_json_text(const Design& design);

}  // namespace conjoint
