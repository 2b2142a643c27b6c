#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wxpipe/char_lm.hpp"
#include "wxpipe/eval_metrics.hpp"

namespace wxpipe {

/// Shannon entropy in bits of the corpus-level character unigram
/// distribution; whitespace is excluded (tokens are space-separated).
double char_entropy(const std::vector<std::string>& corpus);

std::size_t observed_alphabet_size(const std::vector<std::string>& corpus);

struct WordEntropyStats {
  double max = 0.0;
  double median = 0.0;  // lower middle for even counts
  double average = 0.0;
};

/// Character entropy per word type, aggregated over the vocabulary.
WordEntropyStats word_char_entropy_stats(
    const std::vector<std::string>& corpus);

/// 1 - H/log2(V). V defaults to the observed alphabet; pass a declared
/// alphabet size to override. Throws DegenerateAlphabet when V < 2.
double redundancy(const std::vector<std::string>& corpus,
                  std::size_t declared_alphabet = 0);

struct EntropyReport {
  double corpus_char_entropy = 0.0;
  WordEntropyStats word_entropy;
  double redundancy = 0.0;
  std::size_t alphabet_size = 0;
};

EntropyReport entropy_report(const std::vector<std::string>& corpus);

enum class MatrixKind { Ssnglm, PerplexityRaw, PerplexitySymmetric };

std::string_view matrix_kind_name(MatrixKind kind);

struct SimilarityMatrix {
  std::vector<std::string> languages;
  MatrixKind kind = MatrixKind::Ssnglm;
  std::vector<std::vector<double>> raw;
  std::vector<std::vector<double>> normalized;  // NaN marks excluded cells

  std::string to_tsv(bool use_normalized = true) const;
  std::string to_json() const;
};

using LabeledCorpora =
    std::vector<std::pair<std::string, std::vector<std::string>>>;

struct MatrixOptions {
  LmOptions lm;  // order 6, Kneser-Ney by default
};

/// Trains one character LM per language and scores every other corpus
/// under it; scores are min-max normalized over the off-diagonal cells, so
/// the self-scored diagonal stays unnormalized (NaN).
SimilarityMatrix ssnglm_matrix(const LabeledCorpora& corpora,
                               const MatrixOptions& opts = {});

/// Directed perplexity matrix, min-max normalized over all cells; with
/// symmetrize the two directions are averaged.
SimilarityMatrix perplexity_matrix(const LabeledCorpora& corpora,
                                   bool symmetrize,
                                   const MatrixOptions& opts = {});

/// Surface similarity of an aligned corpus pair: one side is scored as the
/// hypothesis against the other via the evaluation metrics.
std::vector<EvalResult> pairwise_surface_similarity(
    const std::vector<std::string>& side_a,
    const std::vector<std::string>& side_b,
    const std::vector<Metric>& metrics);

}  // namespace wxpipe
