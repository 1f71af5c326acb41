#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace conjoint {

// Bump when the extraction cascade changes; the golden corpus is versioned with it.
inline constexpr int kParserVersion = 1;

enum class ParseKind { score, refusal, unparseable };

std::string_view to_string(ParseKind kind);
ParseKind parse_kind_from_string(std::string_view s);

struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive, byte offsets

  bool operator==(const TextSpan&) const = default;
};

struct ParseOutcome {
  ParseKind kind = ParseKind::unparseable;
  std::optional<int> score;  // set iff kind == score
  TextSpan matched_span;
  int rule = 6;  // which cascade rule produced the outcome (1..6)

  bool operator==(const ParseOutcome&) const = default;
};

/// Extracts the 0-100 invasion score from free model text. Rules, first match wins:
///  1. the whole trimmed text is a number in range;
///  2. the last "<n>/100" or "<n> out of 100";
///  3. the last in-range number after a cue word (answer, score, rating, invade) on the same line;
///  4. exactly one in-range number anywhere;
///  5. a refusal cue;
///  6. unparseable.
/// Numbers directly followed by '%' never count. Decimals truncate toward zero.
ParseOutcome parse_score(std::string_view text);

}  // namespace conjoint
