#pragma once

#include <map>
#include <string>
#include <vector>

namespace wxpipe {

enum class Metric { Bleu, CharBleu, Chrf2, Ter, Wer };

std::string_view metric_name(Metric m);
Metric metric_from_name(std::string_view name);

struct EvalResult {
  Metric metric = Metric::Bleu;
  double score = 0.0;  // bleu/char_bleu/chrf2 in [0,100]; wer in percent;
                       // ter as a fraction of reference words
  std::map<std::string, double> details;
  std::string signature;
};

enum class BleuMode { Standard, Literal };

/// Corpus-level BLEU over whitespace tokens. Standard mode uses the
/// exponential brevity penalty and add-epsilon smoothing on zero
/// precisions above order 1; the literal mode multiplies the raw
/// precisions by min(1, hyp_len/ref_len).
EvalResult bleu(const std::vector<std::string>& hyp,
                const std::vector<std::string>& ref, int max_order = 4,
                BleuMode mode = BleuMode::Standard);

/// BLEU over character sequences with whitespace retained.
EvalResult char_bleu(const std::vector<std::string>& hyp,
                     const std::vector<std::string>& ref, int max_order = 4);

/// Character n-gram F-score: precision and recall averaged over orders
/// 1..char_order, recall weighted by beta; spaces removed first.
EvalResult chrf2(const std::vector<std::string>& hyp,
                 const std::vector<std::string>& ref, int char_order = 6,
                 double beta = 2.0);

/// Word error rate: Levenshtein edits over reference words, in percent.
EvalResult wer(const std::vector<std::string>& hyp,
               const std::vector<std::string>& ref);

/// Translation edit rate: greedy block shifts plus remaining edits over
/// reference words. Shift search is bounded in distance and block length.
EvalResult ter(const std::vector<std::string>& hyp,
               const std::vector<std::string>& ref,
               int max_shift_distance = 10, int max_block_length = 10);

}  // namespace wxpipe
