#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wxpipe {

enum class Smoothing { KneserNey, WittenBell, Mle, Uniform };

std::string_view smoothing_name(Smoothing s);
Smoothing smoothing_from_name(std::string_view name);

struct LmOptions {
  int order = 6;
  Smoothing smoothing = Smoothing::KneserNey;
  double discount = 0.75;
  bool include_eos = true;
};

struct SentenceScore {
  double total_log10_prob = 0.0;
  std::size_t scored_tokens = 0;
};

/// Character-level n-gram language model. Sentences are padded with n-1
/// BOS symbols and one EOS (optional); whitespace is a regular character.
/// Smoothed probabilities are stored in backoff form, so a trained model
/// and one loaded from its ARPA file score identically.
class CharNGramLM {
 public:
  static constexpr char32_t kBos = 0x110000;
  static constexpr char32_t kEos = 0x110001;
  static constexpr char32_t kUnk = 0x110002;

  CharNGramLM() = default;

  static CharNGramLM train(const std::vector<std::string>& corpus,
                           const LmOptions& opts = {});

  /// Conditional log10 p(symbol | context); context longer than order-1 is
  /// truncated to its suffix, out-of-alphabet symbols map to UNK. Returns
  /// -inf only in MLE mode.
  double log10_prob(std::u32string_view context, char32_t symbol) const;
  double prob(std::u32string_view context, char32_t symbol) const;

  SentenceScore sentence_logprob(std::string_view line) const;

  /// Per-token average log10 probability of the corpus under this model.
  double corpus_score(const std::vector<std::string>& corpus) const;

  /// 10^(-average log10 prob); +inf when an MLE zero is hit.
  double perplexity(const std::vector<std::string>& corpus) const;

  const std::set<char32_t>& alphabet() const { return alphabet_; }
  std::size_t alphabet_size() const { return alphabet_.size(); }
  const LmOptions& options() const { return opts_; }

  std::string to_arpa() const;
  void save_arpa(const std::string& path) const;
  static CharNGramLM from_arpa(std::string_view text,
                               std::string_view origin = "<memory>");
  static CharNGramLM load_arpa(const std::string& path);

 private:
  LmOptions opts_;
  // Scorable symbols: observed characters, EOS when enabled, and UNK.
  std::set<char32_t> alphabet_;
  // probs_[o-1]: log10 p for observed o-grams; backoffs_[o-1]: log10 alpha
  // for length-o contexts (o < order).
  std::vector<std::map<std::u32string, double>> probs_;
  std::vector<std::map<std::u32string, double>> backoffs_;
};

}  // namespace wxpipe
