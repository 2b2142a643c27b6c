#include "wxpipe/char_lm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "doctest.h"
#include "wxpipe/errors.hpp"
#include "wxpipe/utf8.hpp"

using namespace wxpipe;

namespace {

constexpr char32_t BOS = CharNGramLM::kBos;
constexpr char32_t EOS = CharNGramLM::kEos;

// Independent counting oracle for MLE conditionals: brute-force window
// enumeration, no sharing with the implementation.
class MleOracle {
 public:
  MleOracle(const std::vector<std::string>& corpus, int order, bool eos) {
    for (const auto& line : corpus) {
      std::u32string seq(order - 1, BOS);
      for (char32_t c : utf8::decode(line)) seq.push_back(c);
      if (eos) seq.push_back(EOS);
      for (std::size_t i = order - 1; i < seq.size(); ++i) {
        ++joint_[seq.substr(i + 1 - order, order)];
        ++context_[seq.substr(i + 1 - order, order - 1)];
      }
    }
  }

  double prob(const std::u32string& context, char32_t c) const {
    auto ctx = context_.find(context);
    if (ctx == context_.end()) return 0.0;
    auto j = joint_.find(context + c);
    return j == joint_.end()
               ? 0.0
               : static_cast<double>(j->second) /
                     static_cast<double>(ctx->second);
  }

 private:
  std::map<std::u32string, uint64_t> joint_, context_;
};

std::vector<std::string> random_corpus(std::mt19937_64& rng, int lines,
                                       std::string_view letters) {
  std::vector<std::string> corpus;
  for (int i = 0; i < lines; ++i) {
    std::string line;
    int len = 3 + rng() % 20;
    for (int k = 0; k < len; ++k) {
      if (k && rng() % 6 == 0) line += ' ';
      line += letters[rng() % letters.size()];
    }
    corpus.push_back(line);
  }
  return corpus;
}

std::string shuffled_within(const std::string& line, std::mt19937_64& rng) {
  std::string copy = line;
  std::shuffle(copy.begin(), copy.end(), rng);
  return copy;
}

}  // namespace

TEST_SUITE_BEGIN("char_lm");

TEST_CASE("order-1 MLE matches hand counts") {
  auto lm = CharNGramLM::train({"aaaa"},
                               {.order = 1, .smoothing = Smoothing::Mle});
  CHECK(lm.prob(U"", U'a') == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(lm.prob(U"", EOS) == doctest::Approx(0.2).epsilon(1e-12));
  auto s = lm.sentence_logprob("aaaa");
  CHECK(s.scored_tokens == 5);
  CHECK(s.total_log10_prob ==
        doctest::Approx(4 * std::log10(0.8) + std::log10(0.2))
            .epsilon(1e-12));
}

TEST_CASE("order-2 MLE conditional") {
  auto lm = CharNGramLM::train({"ab"},
                               {.order = 2, .smoothing = Smoothing::Mle});
  CHECK(lm.prob(U"a", U'b') == doctest::Approx(1.0));
  // unseen event has probability zero in MLE mode
  CHECK(lm.log10_prob(U"a", U'a') == -std::numeric_limits<double>::infinity());
}

TEST_CASE("uniform baseline") {
  auto lm = CharNGramLM::train({"ab"},
                               {.order = 3, .smoothing = Smoothing::Uniform});
  // alphabet: a, b, EOS, UNK
  CHECK(lm.alphabet_size() == 4);
  CHECK(lm.prob(U"ab", U'a') == doctest::Approx(0.25));
  CHECK(lm.prob(U"", U'Q') == doctest::Approx(0.25));  // unknown -> UNK
  auto s = lm.sentence_logprob("abab");
  CHECK(s.scored_tokens == 5);
  CHECK(s.total_log10_prob == doctest::Approx(-5 * std::log10(4.0)));
  CHECK(lm.corpus_score({"x", "yz"}) == doctest::Approx(-std::log10(4.0)));
}

TEST_CASE("uniform perplexity equals alphabet size") {
  // eight distinct characters + EOS + UNK give an alphabet of ten, which
  // keeps the log10 arithmetic exact
  auto lm = CharNGramLM::train({"abcdefgh"},
                               {.order = 2, .smoothing = Smoothing::Uniform});
  REQUIRE(lm.alphabet_size() == 10);
  CHECK(lm.perplexity({"abcdefgh", "hgf"}) == 10.0);
  // and within float tolerance for a non-power-of-ten alphabet
  auto lm7 = CharNGramLM::train({"abcde"},
                                {.order = 2, .smoothing = Smoothing::Uniform});
  REQUIRE(lm7.alphabet_size() == 7);
  CHECK(lm7.perplexity({"abc"}) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("single-symbol unsmoothed perplexity is one") {
  auto lm = CharNGramLM::train(
      {"aaaa"},
      {.order = 1, .smoothing = Smoothing::Mle, .include_eos = false});
  CHECK(lm.perplexity({"aaaa"}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("order-2 perplexity against counting oracle") {
  std::vector<std::string> corpus = {"abab"};
  LmOptions opts{.order = 2, .smoothing = Smoothing::Mle};
  auto lm = CharNGramLM::train(corpus, opts);
  MleOracle oracle(corpus, 2, true);
  // p(a|BOS)=1, p(b|a)=1, p(a|b)=1/2, p(EOS|b)=1/2
  CHECK(oracle.prob({BOS}, U'a') == doctest::Approx(1.0));
  CHECK(oracle.prob(U"b", U'a') == doctest::Approx(0.5));
  double expected_total = std::log10(1.0 * 1.0 * 0.5 * 1.0 * 0.5);
  auto s = lm.sentence_logprob("abab");
  CHECK(s.total_log10_prob == doctest::Approx(expected_total).epsilon(1e-12));
  CHECK(lm.perplexity(corpus) ==
        doctest::Approx(std::pow(10.0, -expected_total / 5.0))
            .epsilon(1e-12));
}

TEST_CASE("MLE matches oracle on random corpora") {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 5; ++round) {
    auto corpus = random_corpus(rng, 10, "abc");
    for (int order : {1, 2, 3}) {
      LmOptions opts{.order = order, .smoothing = Smoothing::Mle};
      auto lm = CharNGramLM::train(corpus, opts);
      MleOracle oracle(corpus, order, true);
      for (const auto& line : corpus) {
        std::u32string seq(order - 1, BOS);
        for (char32_t c : utf8::decode(line)) seq.push_back(c);
        seq.push_back(EOS);
        for (std::size_t i = order - 1; i < seq.size(); ++i) {
          std::u32string ctx = seq.substr(i + 1 - order, order - 1);
          CHECK(lm.prob(ctx, seq[i]) ==
                doctest::Approx(oracle.prob(ctx, seq[i])).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("smoothed distributions normalize per context") {
  std::mt19937_64 rng(7);
  auto corpus = random_corpus(rng, 15, "abcd ");
  for (Smoothing mode : {Smoothing::KneserNey, Smoothing::WittenBell}) {
    for (int order : {1, 2, 3, 6}) {
      auto lm = CharNGramLM::train(
          corpus, {.order = order, .smoothing = mode});
      int checked = 0;
      for (const auto& line : corpus) {
        std::u32string seq(order - 1, BOS);
        for (char32_t c : utf8::decode(line)) seq.push_back(c);
        for (std::size_t i = order - 1; i < seq.size() && checked < 40;
             ++i, ++checked) {
          std::u32string ctx = seq.substr(i + 1 - order, order - 1);
          double sum = 0;
          for (char32_t c : lm.alphabet()) sum += lm.prob(ctx, c);
          CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
      }
      // unseen context backs off and still normalizes
      double sum = 0;
      for (char32_t c : lm.alphabet())
        sum += lm.prob(U"zzzzzz", c);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("all smoothed probabilities are positive") {
  auto lm = CharNGramLM::train({"abc abc", "cab"}, {.order = 3});
  for (char32_t c : lm.alphabet()) {
    CHECK(lm.prob(U"ab", c) > 0.0);
    CHECK(lm.prob(U"zz", c) > 0.0);
    CHECK(lm.prob(U"", c) > 0.0);
  }
}

TEST_CASE("unigram MLE is optimal on training data") {
  std::vector<std::string> corpus = {"aab", "abcab"};
  auto lm = CharNGramLM::train(corpus,
                               {.order = 1, .smoothing = Smoothing::Mle});
  double best = lm.corpus_score(corpus);
  // perturb the unigram distribution along random directions; training
  // log-likelihood must not improve
  std::map<char32_t, double> base;
  for (char32_t c : lm.alphabet())
    if (c != CharNGramLM::kUnk) base[c] = lm.prob(U"", c);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::map<char32_t, double> q = base;
    double delta = 0.01 + 0.001 * (rng() % 50);
    auto a = std::next(q.begin(), rng() % q.size());
    auto b = std::next(q.begin(), rng() % q.size());
    if (a == b || a->second <= delta) continue;
    a->second -= delta;
    b->second += delta;
    double ll = 0, tokens = 0;
    for (const auto& line : corpus) {
      for (char32_t c : utf8::decode(line)) {
        ll += std::log10(q.at(c));
        ++tokens;
      }
      ll += std::log10(q.at(EOS));
      ++tokens;
    }
    CHECK(ll / tokens <= best + 1e-12);
  }
}

TEST_CASE("training corpus outscores shuffled corpus") {
  std::mt19937_64 rng(11);
  std::vector<std::string> corpus;
  for (int i = 0; i < 25; ++i) {
    std::string base = i % 2 ? "wxa mEM ne apanA kAma" : "basa eka xina Ora";
    corpus.push_back(base + (i % 3 ? " hE" : " WA"));
  }
  auto lm = CharNGramLM::train(corpus, {.order = 4});
  std::vector<std::string> corrupted;
  for (const auto& line : corpus)
    corrupted.push_back(shuffled_within(line, rng));
  CHECK(lm.corpus_score(corpus) >= lm.corpus_score(corrupted));
}

TEST_CASE("perplexity is consistent with corpus score") {
  auto corpus = std::vector<std::string>{"abcabc", "bca"};
  auto lm = CharNGramLM::train(corpus, {.order = 3});
  CHECK(lm.perplexity(corpus) ==
        std::pow(10.0, -lm.corpus_score(corpus)));
}

TEST_CASE("single-sentence corpus score equals its normalized sentence "
          "score") {
  auto lm = CharNGramLM::train({"abcabc", "bca"}, {.order = 3});
  auto s = lm.sentence_logprob("cab");
  CHECK(lm.corpus_score({"cab"}) ==
        doctest::Approx(s.total_log10_prob /
                        static_cast<double>(s.scored_tokens))
            .epsilon(1e-12));
}

TEST_CASE("scoring is safe from concurrent threads") {
  auto lm = CharNGramLM::train({"abcabc abc", "bca cab", "aabbcc"},
                               {.order = 3});
  auto expected = lm.sentence_logprob("abc cab").total_log10_prob;
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        if (lm.sentence_logprob("abc cab").total_log10_prob != expected)
          ++mismatches;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(mismatches == 0);
}

TEST_CASE("empty line scores only the end symbol") {
  auto lm = CharNGramLM::train({"ab"}, {.order = 2});
  auto s = lm.sentence_logprob("");
  CHECK(s.scored_tokens == 1);
  CHECK(s.total_log10_prob < 0);
}

TEST_CASE("arpa round trip preserves scores") {
  std::mt19937_64 rng(19);
  auto corpus = random_corpus(rng, 12, "abcd ");
  for (Smoothing mode : {Smoothing::KneserNey, Smoothing::WittenBell,
                         Smoothing::Mle, Smoothing::Uniform}) {
    auto lm = CharNGramLM::train(corpus, {.order = 3, .smoothing = mode});
    auto reloaded = CharNGramLM::from_arpa(lm.to_arpa());
    for (int i = 0; i < 20; ++i) {
      std::string line = random_corpus(rng, 1, "abcde ")[0];
      auto a = lm.sentence_logprob(line);
      auto b = reloaded.sentence_logprob(line);
      CHECK(a.scored_tokens == b.scored_tokens);
      if (std::isinf(a.total_log10_prob)) {
        CHECK(std::isinf(b.total_log10_prob));
      } else {
        CHECK(a.total_log10_prob ==
              doctest::Approx(b.total_log10_prob).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("hand-written arpa file loads") {
  std::string text =
      "\\data\\\n"
      "ngram 1=2\n"
      "\n"
      "\\1-grams:\n"
      "-0.3010299956639812\ta\n"
      "-0.6989700043360187\tb\n"
      "\n"
      "\\end\\\n";
  auto lm = CharNGramLM::from_arpa(text);
  CHECK(lm.prob(U"", U'a') == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lm.prob(U"", U'b') == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(CharNGramLM::train({}), EmptyCorpus);
  CHECK_THROWS_AS(CharNGramLM::train({"ab"}, {.order = 0}), InvalidOrder);
  CHECK_THROWS_AS(
      CharNGramLM::train({""}, {.order = 2, .include_eos = false}),
      EmptyCorpus);
  CHECK_THROWS_AS(CharNGramLM::from_arpa("\\data\\\nngram 1=0\n\\end\\\n"),
                  FormatError);
  CHECK_THROWS_AS(CharNGramLM::from_arpa("not an arpa file"), FormatError);
  auto lm = CharNGramLM::train({"ab"});
  CHECK_THROWS_AS(lm.corpus_score({}), EmptyCorpus);
  // MLE zero propagates to +inf perplexity
  auto mle = CharNGramLM::train({"ab"},
                                {.order = 2, .smoothing = Smoothing::Mle});
  CHECK(std::isinf(mle.perplexity({"ba"})));
}

TEST_SUITE_END();
