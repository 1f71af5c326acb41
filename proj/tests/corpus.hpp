#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conjoint/parser.hpp"

namespace testing {

struct CorpusCase {
  std::string expected;  // "score:<n>", "refusal" or "unparseable"
  std::string text;
};

inline std::vector<CorpusCase> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing corpus " + path);
  std::vector<CorpusCase> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("bad corpus line: " + line);
    std::string text;
    for (std::size_t i = tab + 1; i < line.size(); ++i) {
      if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == 'n') {
        text.push_back('\n');
        ++i;
      } else {
        text.push_back(line[i]);
      }
    }
    out.push_back({line.substr(0, tab), text});
  }
  return out;
}

inline std::string outcome_label(const conjoint::ParseOutcome& o) {
  if (o.kind == conjoint::ParseKind::score) return "score:" + std::to_string(*o.score);
  return std::string(conjoint::to_string(o.kind));
}

inline std::string corpus_path() {
  return std::string(CONJOINT_TEST_DATA_DIR) + "/parser_corpus_v" + std::to_string(conjoint::kParserVersion) + ".tsv";
}

}  // namespace testing
