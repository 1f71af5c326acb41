#include "conjoint/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <vector>

#include "conjoint/error.hpp"

namespace conjoint {

std::string_view to_string(ParseKind kind) {
  switch (kind) {
    case ParseKind::score: return "score";
    case ParseKind::refusal: return "refusal";
    case ParseKind::unparseable: return "unparseable";
  }
  return "unparseable";
}

ParseKind parse_kind_from_string(std::string_view s) {
  if (s == "score") return ParseKind::score;
  if (s == "refusal") return ParseKind::refusal;
  if (s == "unparseable") return ParseKind::unparseable;
  throw Error(ErrorCode::invalid_input, "unknown parse kind '" + std::string(s) + "'");
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct Number {
  std::size_t begin = 0;
  std::size_t end = 0;
  double value = 0.0;
  bool percent = false;
  bool eligible = false;  // in [0, 100], not a percentage, not glued to letters
};

// Splits text into numeric tokens. "10,000" is one token; "42.5" keeps its fraction.
std::vector<Number> scan_numbers(std::string_view text) {
  std::vector<Number> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!is_digit(text[i]) || (i > 0 && (is_digit(text[i - 1]) || text[i - 1] == '.'))) {
      ++i;
      continue;
    }
    Number num;
    num.begin = i;
    std::string digits;
    while (i < n && is_digit(text[i])) digits.push_back(text[i++]);
    // Thousands groups: ",ddd" not followed by another digit.
    while (i + 3 < n && text[i] == ',' && is_digit(text[i + 1]) && is_digit(text[i + 2]) &&
           is_digit(text[i + 3]) && (i + 4 >= n || !is_digit(text[i + 4]))) {
      digits.append(text.substr(i + 1, 3));
      i += 4;
    }
    std::string fraction;
    if (i + 1 < n && text[i] == '.' && is_digit(text[i + 1])) {
      ++i;
      while (i < n && is_digit(text[i])) fraction.push_back(text[i++]);
    }
    num.end = i;
    num.value = std::stod(digits + (fraction.empty() ? "" : "." + fraction));
    num.percent = i < n && text[i] == '%';
    const bool negative = num.begin > 0 && text[num.begin - 1] == '-' &&
                          (num.begin < 2 || !is_digit(text[num.begin - 2]));
    const bool glued = (num.begin > 0 && is_alpha(text[num.begin - 1])) || (i < n && is_alpha(text[i]));
    num.eligible = !num.percent && !negative && !glued && num.value >= 0.0 && num.value <= 100.0;
    out.push_back(num);
  }
  return out;
}

ParseOutcome score_outcome(const Number& num, int rule) {
  ParseOutcome o;
  o.kind = ParseKind::score;
  o.score = static_cast<int>(num.value);  // truncation toward zero
  o.matched_span = {num.begin, num.end};
  o.rule = rule;
  return o;
}

std::string lowercase(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::size_t skip_spaces(std::string_view s, std::size_t i) {
  while (i < s.size() && is_space(s[i])) ++i;
  return i;
}

// True when s[i..] starts with "100" as a whole number.
bool hundred_at(std::string_view s, std::size_t i) {
  if (s.substr(i, 3) != "100") return false;
  const std::size_t j = i + 3;
  if (j < s.size() && is_digit(s[j])) return false;
  if (j + 1 < s.size() && s[j] == '.' && is_digit(s[j + 1])) return false;
  return true;
}

bool followed_by_out_of_100(std::string_view lower, std::size_t end) {
  std::size_t i = skip_spaces(lower, end);
  if (i < lower.size() && lower[i] == '/') {
    return hundred_at(lower, skip_spaces(lower, i + 1));
  }
  if (i == end) return false;  // "out of" needs separating whitespace
  if (lower.substr(i, 3) != "out") return false;
  std::size_t j = skip_spaces(lower, i + 3);
  if (j == i + 3 || lower.substr(j, 2) != "of") return false;
  std::size_t k = skip_spaces(lower, j + 2);
  if (k == j + 2) return false;
  return hundred_at(lower, k);
}

constexpr std::array<std::string_view, 4> kCueWords = {"answer", "score", "rating", "invade"};
constexpr std::array<std::string_view, 6> kRefusalCues = {
    "cannot", "won't", "won’t", "unable to", "i can't", "i can’t"};

}  // namespace

ParseOutcome parse_score(std::string_view text) {
  const std::vector<Number> numbers = scan_numbers(text);
  const std::string lower = lowercase(text);

  // Rule 1: whole trimmed text is one number (a trailing period is tolerated).
  {
    std::size_t b = 0, e = text.size();
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (e > b && text[e - 1] == '.') --e;
    for (const auto& num : numbers) {
      if (num.begin == b && num.end == e && num.eligible) return score_outcome(num, 1);
    }
  }

  // Rule 2: last "<n>/100" or "<n> out of 100".
  for (auto it = numbers.rbegin(); it != numbers.rend(); ++it) {
    if (it->eligible && followed_by_out_of_100(lower, it->end)) return score_outcome(*it, 2);
  }

  // Rule 3: last eligible number after a cue word on the same line.
  {
    const Number* best = nullptr;
    std::size_t line_begin = 0;
    while (line_begin <= lower.size()) {
      std::size_t line_end = lower.find('\n', line_begin);
      if (line_end == std::string::npos) line_end = lower.size();
      std::string_view line(lower.data() + line_begin, line_end - line_begin);
      std::size_t cue_end = std::string::npos;
      for (auto cue : kCueWords) {
        std::size_t p = line.find(cue);
        if (p != std::string::npos) cue_end = std::min(cue_end, line_begin + p + cue.size());
      }
      if (cue_end != std::string::npos) {
        for (const auto& num : numbers) {
          if (num.eligible && num.begin >= cue_end && num.end <= line_end) best = &num;
        }
      }
      line_begin = line_end + 1;
    }
    if (best) return score_outcome(*best, 3);
  }

  // Rule 4: exactly one eligible number anywhere.
  {
    const Number* only = nullptr;
    std::size_t count = 0;
    for (const auto& num : numbers) {
      if (num.eligible) {
        only = &num;
        ++count;
      }
    }
    if (count == 1) return score_outcome(*only, 4);
  }

  // Rule 5: refusal cue.
  for (auto cue : kRefusalCues) {
    std::size_t p = lower.find(cue);
    if (p != std::string::npos) {
      ParseOutcome o;
      o.kind = ParseKind::refusal;
      o.matched_span = {p, p + cue.size()};
      o.rule = 5;
      return o;
    }
  }

  return ParseOutcome{};
}

}  // namespace conjoint
