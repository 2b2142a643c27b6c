#include "wxpipe/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/metric_oracles.hpp"
#include "wxpipe/errors.hpp"
#include "wxpipe/utf8.hpp"

using namespace wxpipe;
using testsupport::chars_of;
using testsupport::oracle_bleu;
using testsupport::oracle_chrf;
using testsupport::oracle_edit_distance;
using testsupport::oracle_ter_counts;
using testsupport::words_of;

namespace {

std::string random_sentence(std::mt19937_64& rng, int max_tokens,
                            const std::vector<std::string>& lexicon) {
  int n = 1 + rng() % max_tokens;
  std::string line;
  for (int i = 0; i < n; ++i) {
    if (i) line += ' ';
    line += lexicon[rng() % lexicon.size()];
  }
  return line;
}

const std::vector<std::string> kLexicon = {
    "eka", "xo",  "wIna", "cAra", "pAzca", "Caha", "sAwa",
    "ATa", "nO",  "xasa", "rAma", "sIwA",  "GastA", "kala"};

}  // namespace

TEST_SUITE_BEGIN("eval_metrics");

TEST_CASE("identity extremes") {
  std::vector<std::string> lines = {"eka xo wIna", "cAra", "pAzca Caha"};
  CHECK(bleu(lines, lines).score == doctest::Approx(100.0));
  CHECK(bleu(lines, lines, 4, BleuMode::Literal).score ==
        doctest::Approx(100.0));
  CHECK(char_bleu(lines, lines).score == doctest::Approx(100.0));
  CHECK(chrf2(lines, lines).score == doctest::Approx(100.0));
  CHECK(wer(lines, lines).score == doctest::Approx(0.0));
  CHECK(ter(lines, lines).score == doctest::Approx(0.0));
}

TEST_CASE("disjoint hypotheses score zero") {
  std::vector<std::string> h = {"x y z"}, r = {"a b c"};
  CHECK(bleu(h, r).score == doctest::Approx(0.0));
  CHECK(bleu(h, r, 4, BleuMode::Literal).score == doctest::Approx(0.0));
  // char level keeps whitespace, so disjoint means no shared spaces either
  CHECK(char_bleu({"xyz"}, {"abc"}).score == doctest::Approx(0.0));
}

TEST_CASE("clipped unigram precision") {
  // "the" appears three times in the hypothesis but once in the reference
  std::vector<std::string> h = {"the the the"}, r = {"the cat"};
  auto result = bleu(h, r);
  CHECK(result.details.at("precision_1") == doctest::Approx(1.0 / 3));
  CHECK(result.score ==
        doctest::Approx(oracle_bleu({words_of(h[0])}, {words_of(r[0])}, 4)));
}

TEST_CASE("brevity penalty applies to short hypotheses") {
  std::vector<std::string> h = {"eka xo"}, r = {"eka xo wIna cAra"};
  auto result = bleu(h, r);
  CHECK(result.details.at("brevity_penalty") ==
        doctest::Approx(std::exp(1.0 - 4.0 / 2.0)));
  // both precisions are 1, so the scores reduce to the two penalties:
  // exp(1 - 4/2) for standard, min(1, 2/4) for the literal form
  CHECK(result.score == doctest::Approx(100.0 * std::exp(-1.0)));
  auto literal = bleu(h, r, 4, BleuMode::Literal);
  CHECK(literal.score == doctest::Approx(50.0));
}

TEST_CASE("empty hypothesis") {
  std::vector<std::string> h = {""}, r = {"eka xo wIna cAra"};
  CHECK(bleu(h, r).score == doctest::Approx(0.0));
  CHECK(chrf2(h, r).score == doctest::Approx(0.0));
  CHECK(wer(h, r).score == doctest::Approx(100.0));  // four deletions
}

TEST_CASE("wer hand case") {
  CHECK(wer({"a x c"}, {"a b c"}).score == doctest::Approx(100.0 / 3));
  CHECK(wer({"a b"}, {"a b c d"}).score == doctest::Approx(50.0));
  // equal length, k mismatches
  CHECK(wer({"a b c d"}, {"a x c y"}).score == doctest::Approx(50.0));
}

TEST_CASE("chrf2 single pair against oracle") {
  std::vector<std::string> h = {"abcd"}, r = {"abce"};
  CHECK(chrf2(h, r).score == doctest::Approx(oracle_chrf(h, r, 6, 2.0)));
}

TEST_CASE("ter transposition counts one shift") {
  auto result = ter({"b a"}, {"a b"});
  CHECK(result.details.at("shifts") == doctest::Approx(1.0));
  CHECK(result.details.at("edits") == doctest::Approx(0.0));
  CHECK(result.score == doctest::Approx(0.5));
}

TEST_CASE("ter equals wer when no shift helps") {
  std::vector<std::string> h = {"eka xo wIna", "rAma sIwA"};
  std::vector<std::string> r = {"eka xo cAra", "rAma kala"};
  CHECK(ter(h, r).score * 100.0 == doctest::Approx(wer(h, r).score));
}

TEST_CASE("ter beats wer when a shift is profitable") {
  std::vector<std::string> h = {"cAra eka xo wIna"};
  std::vector<std::string> r = {"eka xo wIna cAra"};
  CHECK(ter(h, r).score * 100.0 < wer(h, r).score);
}

TEST_CASE("metrics match oracles on random pairs") {
  std::mt19937_64 rng(0xBEEF);
  for (int round = 0; round < 60; ++round) {
    std::vector<std::string> h, r;
    int lines = 1 + rng() % 3;
    for (int i = 0; i < lines; ++i) {
      std::string base = random_sentence(rng, 8, kLexicon);
      h.push_back(rng() % 3 == 0 ? base : random_sentence(rng, 8, kLexicon));
      if (rng() % 4 == 0) {
        auto tokens = words_of(base);
        std::shuffle(tokens.begin(), tokens.end(), rng);
        std::string shuffled;
        for (const auto& t : tokens)
          shuffled += (shuffled.empty() ? "" : " ") + t;
        r.push_back(shuffled);
      } else {
        r.push_back(base);
      }
    }

    std::vector<std::vector<std::string>> hw, rw, hc, rc;
    for (const auto& s : h) hw.push_back(words_of(s));
    for (const auto& s : r) rw.push_back(words_of(s));
    for (const auto& s : h) hc.push_back(chars_of(s, true));
    for (const auto& s : r) rc.push_back(chars_of(s, true));

    CHECK(bleu(h, r).score ==
          doctest::Approx(oracle_bleu(hw, rw, 4)).epsilon(1e-9));
    CHECK(char_bleu(h, r).score ==
          doctest::Approx(oracle_bleu(hc, rc, 4)).epsilon(1e-9));
    CHECK(chrf2(h, r).score ==
          doctest::Approx(oracle_chrf(h, r, 6, 2.0)).epsilon(1e-9));

    long edits = 0, words = 0;
    long ter_edits = 0, ter_shifts = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      edits += oracle_edit_distance(hw[i], rw[i]);
      words += static_cast<long>(rw[i].size());
      auto [e, s] = oracle_ter_counts(hw[i], rw[i]);
      ter_edits += e;
      ter_shifts += s;
    }
    CHECK(wer(h, r).score ==
          doctest::Approx(100.0 * edits / words).epsilon(1e-9));
    CHECK(ter(h, r).score ==
          doctest::Approx(static_cast<double>(ter_edits + ter_shifts) /
                          words)
              .epsilon(1e-9));
  }
}

TEST_CASE("corpus scores are invariant under line reordering") {
  std::mt19937_64 rng(5);
  std::vector<std::string> h, r;
  for (int i = 0; i < 10; ++i) {
    h.push_back(random_sentence(rng, 6, kLexicon));
    r.push_back(random_sentence(rng, 6, kLexicon));
  }
  std::vector<std::size_t> perm(h.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::string> hp, rp;
  for (std::size_t i : perm) {
    hp.push_back(h[i]);
    rp.push_back(r[i]);
  }
  CHECK(bleu(h, r).score == doctest::Approx(bleu(hp, rp).score));
  CHECK(chrf2(h, r).score == doctest::Approx(chrf2(hp, rp).score));
  CHECK(wer(h, r).score == doctest::Approx(wer(hp, rp).score));
  CHECK(ter(h, r).score == doctest::Approx(ter(hp, rp).score));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(bleu({"a"}, {"a", "b"}), AlignmentMismatch);
  CHECK_THROWS_AS(chrf2({"a"}, {}), AlignmentMismatch);
  CHECK_THROWS_AS(wer({""}, {""}), EmptyReference);
  CHECK_THROWS_AS(bleu({""}, {""}), EmptyReference);
  CHECK_THROWS_AS(ter({""}, {""}), EmptyReference);
}

TEST_SUITE_END();
