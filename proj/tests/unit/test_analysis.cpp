#include "wxpipe/analysis.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "wxpipe/errors.hpp"
#include "wxpipe/wx_codec.hpp"

using namespace wxpipe;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open ", path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

double h2(double a, double b) {  // entropy of a two-outcome distribution
  double pa = a / (a + b), pb = b / (a + b);
  return -pa * std::log2(pa) - pb * std::log2(pb);
}

}  // namespace

TEST_SUITE_BEGIN("analysis");

TEST_CASE("char entropy hand values") {
  CHECK(char_entropy({"aaaa"}) == doctest::Approx(0.0));
  CHECK(char_entropy({"abab"}) == doctest::Approx(1.0));
  CHECK(char_entropy({"aab"}) == doctest::Approx(h2(2, 1)).epsilon(1e-12));
  // whitespace is not a character event
  CHECK(char_entropy({"aa bb", "ab"}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(char_entropy({"   "}), EmptyCorpus);
}

TEST_CASE("word entropy stats") {
  auto flat = word_char_entropy_stats({"aa bb"});
  CHECK(flat.max == doctest::Approx(0.0));
  CHECK(flat.median == doctest::Approx(0.0));
  CHECK(flat.average == doctest::Approx(0.0));

  auto single = word_char_entropy_stats({"ab"});
  CHECK(single.max == doctest::Approx(1.0));
  CHECK(single.median == doctest::Approx(1.0));
  CHECK(single.average == doctest::Approx(1.0));

  auto two = word_char_entropy_stats({"ab aab"});
  CHECK(two.max == doctest::Approx(1.0));
  // lower middle of {0.9183, 1.0}
  CHECK(two.median == doctest::Approx(h2(2, 1)).epsilon(1e-12));
  CHECK(two.average == doctest::Approx((1.0 + h2(2, 1)) / 2).epsilon(1e-12));

  // repeated tokens count once: the vocabulary is a set of types
  auto types = word_char_entropy_stats({"ab ab ab aab"});
  CHECK(types.average == doctest::Approx((1.0 + h2(2, 1)) / 2).epsilon(1e-12));
}

TEST_CASE("redundancy") {
  CHECK(redundancy({"aaaa"}, 2) == doctest::Approx(1.0));
  CHECK(redundancy({"abab"}) == doctest::Approx(0.0));
  CHECK(redundancy({"aab"}) == doctest::Approx(1.0 - h2(2, 1)).epsilon(1e-12));
  CHECK_THROWS_AS(redundancy({"aaaa"}), DegenerateAlphabet);
  // complement identity
  std::vector<std::string> corpus = {"abcabc aabbc", "cab"};
  double v = static_cast<double>(observed_alphabet_size(corpus));
  CHECK(redundancy(corpus) + char_entropy(corpus) / std::log2(v) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("entropy stays within its alphabet bound") {
  std::mt19937_64 rng(123);
  const std::string letters = "abcdefgh xyz";
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> corpus;
    for (int i = 0; i < 5; ++i) {
      std::string line;
      int len = 1 + rng() % 30;
      for (int k = 0; k < len; ++k) line += letters[rng() % letters.size()];
      corpus.push_back(line);
    }
    double v = static_cast<double>(observed_alphabet_size(corpus));
    if (v == 0) continue;
    double h = char_entropy(corpus);
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(std::max(v, 1.0)) + 1e-12);
  }
}

TEST_CASE("entropy decreases after wx encoding on bundled samples") {
  for (const char* name :
       {"hi_sample_a.txt", "hi_sample_b.txt", "hi_sample_c.txt"}) {
    auto raw = read_lines(std::string(WXPIPE_SOURCE_DIR) + "/data/samples/" +
                          name);
    std::size_t chars = 0;
    for (const auto& line : raw) chars += line.size();
    CHECK(chars >= 10000);
    std::vector<std::string> wx;
    for (const auto& line : raw)
      wx.push_back(encode(line, ScriptId::Devanagari).wx);
    CHECK(char_entropy(wx) < char_entropy(raw));
  }
}

TEST_CASE("ssnglm matrix normalization bounds") {
  LabeledCorpora corpora = {
      {"aa", {"kamala ne kamala xeKA", "kamala Gara gayA"}},
      {"bb", {"wow sit mit tog", "sit tog wot"}},
      {"cc", {"kamala ne Pala KAyA", "Pala Gara para WA"}},
  };
  MatrixOptions opts;
  opts.lm.order = 3;
  auto m = ssnglm_matrix(corpora, opts);

  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) {
        CHECK(std::isnan(m.normalized[i][j]));
        continue;
      }
      lo = std::min(lo, m.normalized[i][j]);
      hi = std::max(hi, m.normalized[i][j]);
      CHECK(m.normalized[i][j] >= 0.0);
      CHECK(m.normalized[i][j] <= 1.0);
    }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
}

TEST_CASE("identical corpora dominate the ssnglm matrix") {
  std::vector<std::string> same = {"kamala ne kamala xeKA",
                                   "kamala Gara gayA"};
  LabeledCorpora corpora = {
      {"x", same},
      {"y", same},
      {"z", {"wpq wpq zzz", "qqq zpw"}},
  };
  MatrixOptions opts;
  opts.lm.order = 2;
  auto m = ssnglm_matrix(corpora, opts);
  CHECK(m.normalized[0][1] == doctest::Approx(1.0));
  CHECK(m.normalized[1][0] == doctest::Approx(1.0));
}

TEST_CASE("two-language ssnglm matrix is exactly {0,1}") {
  LabeledCorpora corpora = {
      {"aa", {"kamala ne kamala xeKA"}},
      {"bb", {"wot sit mit"}},
  };
  MatrixOptions opts;
  opts.lm.order = 2;
  auto m = ssnglm_matrix(corpora, opts);
  std::multiset<double> values = {m.normalized[0][1], m.normalized[1][0]};
  CHECK(*values.begin() == 0.0);
  CHECK(*values.rbegin() == 1.0);
}

TEST_CASE("perplexity matrix diagonal and symmetry") {
  LabeledCorpora corpora = {
      {"aa", {"kamala ne kamala xeKA", "kamala Gara gayA", "Gara gayA"}},
      {"bb", {"wow sit mit tog", "sit tog wot", "mit wot sit"}},
      {"cc", {"kamala ne Pala KAyA", "Pala Gara para WA", "para Pala"}},
  };
  MatrixOptions opts;
  opts.lm.order = 3;

  auto raw = perplexity_matrix(corpora, false, opts);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) CHECK(raw.normalized[i][i] <= raw.normalized[i][j]);
    }

  auto sym = perplexity_matrix(corpora, true, opts);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(sym.normalized[i][j] == sym.normalized[j][i]);
      CHECK(sym.raw[i][j] == sym.raw[j][i]);
    }
}

TEST_CASE("uniform mode gives a flat perplexity matrix") {
  LabeledCorpora corpora = {
      {"aa", {"abc cab"}},
      {"bb", {"bca acb"}},
  };
  MatrixOptions opts;
  opts.lm.order = 2;
  opts.lm.smoothing = Smoothing::Uniform;
  auto m = perplexity_matrix(corpora, false, opts);
  CHECK(m.raw[0][1] == doctest::Approx(m.raw[1][0]));
  CHECK(m.raw[0][0] == doctest::Approx(m.raw[1][1]));
}

TEST_CASE("matrix serialization") {
  LabeledCorpora corpora = {
      {"aa", {"kamala ne"}},
      {"bb", {"wot sit"}},
  };
  MatrixOptions opts;
  opts.lm.order = 2;
  auto m = ssnglm_matrix(corpora, opts);
  auto tsv = m.to_tsv();
  CHECK(tsv.find("ssnglm\taa\tbb") == 0);
  CHECK(tsv.find("-") != std::string::npos);  // diagonal dashes
  auto json = m.to_json();
  CHECK(json.find("\"languages\"") != std::string::npos);
  CHECK(json.find("null") != std::string::npos);  // NaN diagonal
}

TEST_CASE("surface similarity delegates to the metrics") {
  std::vector<std::string> a = {"rAma Gara gayA", "sIwA Pala KAwI hE",
                                "basa eka xina"};
  std::vector<std::string> b = {"rAma Gara gayA", "sIwA Pala KAwI WI",
                                "basa xo xina"};
  auto results = pairwise_surface_similarity(
      a, b, {Metric::CharBleu, Metric::Chrf2, Metric::Ter});
  REQUIRE(results.size() == 3);
  CHECK(results[0].score == doctest::Approx(char_bleu(a, b).score));
  CHECK(results[1].score == doctest::Approx(chrf2(a, b).score));
  CHECK(results[2].score == doctest::Approx(ter(a, b).score));

  auto identity = pairwise_surface_similarity(a, a, {Metric::CharBleu,
                                                     Metric::Chrf2,
                                                     Metric::Ter});
  CHECK(identity[0].score == doctest::Approx(100.0));
  CHECK(identity[1].score == doctest::Approx(100.0));
  CHECK(identity[2].score == doctest::Approx(0.0));

  CHECK_THROWS_AS(
      pairwise_surface_similarity(a, {"x"}, {Metric::CharBleu}),
      AlignmentMismatch);
}

TEST_SUITE_END();
