#include "conjoint/parser.hpp"

#include <doctest.h>

#include <random>
#include <string>

#include "corpus.hpp"

using namespace conjoint;

TEST_CASE("golden corpus") {
  const auto cases = testing::load_corpus(testing::corpus_path());
  REQUIRE(cases.size() >= 25);
  for (const auto& c : cases) {
    CAPTURE(c.text);
    CHECK(testing::outcome_label(parse_score(c.text)) == c.expected);
  }
}

TEST_CASE("every integer on the scale round-trips") {
  for (int n = 0; n <= 100; ++n) {
    const ParseOutcome o = parse_score(std::to_string(n));
    REQUIRE(o.kind == ParseKind::score);
    CHECK(*o.score == n);
    CHECK(o.rule == 1);
    CHECK(o.matched_span == TextSpan{0, std::to_string(n).size()});
  }
}

TEST_CASE("rules report which step fired") {
  CHECK(parse_score("30").rule == 1);
  CHECK(parse_score("I would rate this 75 out of 100.").rule == 2);
  CHECK(parse_score("Considering the 65% support and 70% victory odds... Answer: 40").rule == 3);
  CHECK(parse_score("I'd say 25.").rule == 4);
  CHECK(parse_score("I cannot assist with planning military aggression.").rule == 5);
  CHECK(parse_score("no idea").rule == 6);
}

TEST_CASE("matched span points at the number") {
  const std::string text = "After weighing it all, my answer is 37 today and 12 tomorrow? Answer 64.";
  const ParseOutcome o = parse_score(text);
  REQUIRE(o.kind == ParseKind::score);
  CHECK(*o.score == 64);
  CHECK(text.substr(o.matched_span.begin, o.matched_span.end - o.matched_span.begin) == "64");
}

TEST_CASE("cue match is case-insensitive and line-bound") {
  CHECK(*parse_score("ANSWER: 12 and 13").score == 13);
  CHECK(parse_score("20\nAnswer: none\n30").kind == ParseKind::unparseable);
}

TEST_CASE("percent-suffixed numbers never become the score") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> pick(0, 100);
  for (int i = 0; i < 500; ++i) {
    const int a = pick(rng), b = pick(rng);
    const std::string text = "Victory odds " + std::to_string(a) + "%, support " + std::to_string(b) + "%. Answer: " +
                             std::to_string(a) + "%";
    CHECK(parse_score(text).kind != ParseKind::score);
  }
}

TEST_CASE("decimals truncate toward zero") {
  CHECK(*parse_score("99.9").score == 99);
  CHECK(*parse_score("Score: 0.4").score == 0);
  CHECK(parse_score("100.5").kind == ParseKind::unparseable);
}

TEST_CASE("parse is deterministic and total") {
  std::mt19937 rng(3);
  const std::string alphabet = "0123456789 %/.,-abcnotuw'\n:";
  for (int i = 0; i < 2000; ++i) {
    std::string s(rng() % 40, ' ');
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
    const ParseOutcome a = parse_score(s);
    CHECK(a == parse_score(s));
    CHECK(a.matched_span.begin <= a.matched_span.end);
    CHECK(a.matched_span.end <= s.size());
    if (a.kind == ParseKind::score) {
      CHECK(*a.score >= 0);
      CHECK(*a.score <= 100);
    } else {
      CHECK(!a.score);
    }
  }
}

TEST_CASE("parse kind names") {
  for (auto k : {ParseKind::score, ParseKind::refusal, ParseKind::unparseable}) {
    CHECK(parse_kind_from_string(to_string(k)) == k);
  }
}
