#include "wxpipe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wxpipe/errors.hpp"
#include "wxpipe/utf8.hpp"

namespace wxpipe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\r' || c == U'\n';
}

std::map<char32_t, std::uint64_t> char_counts(
    const std::vector<std::string>& corpus) {
  std::map<char32_t, std::uint64_t> counts;
  for (const auto& line : corpus)
    for (char32_t c : utf8::decode(line))
      if (!is_space(c)) ++counts[c];
  return counts;
}

double entropy_of_counts(const std::map<char32_t, std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto& [c, n] : counts) total += n;
  double h = 0.0;
  for (const auto& [c, n] : counts) {
    double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

std::string format_cell(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Min-max over the selected cells; a degenerate span normalizes to zero.
void minmax_normalize(SimilarityMatrix& m, bool include_diagonal) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::size_t n = m.languages.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!include_diagonal && i == j) continue;
      lo = std::min(lo, m.raw[i][j]);
      hi = std::max(hi, m.raw[i][j]);
    }
  m.normalized.assign(n, std::vector<double>(n, kNaN));
  double span = hi - lo;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!include_diagonal && i == j) continue;
      m.normalized[i][j] = span > 0 ? (m.raw[i][j] - lo) / span : 0.0;
    }
}

}  // namespace

double char_entropy(const std::vector<std::string>& corpus) {
  auto counts = char_counts(corpus);
  if (counts.empty())
    throw EmptyCorpus("no characters outside whitespace");
  return entropy_of_counts(counts);
}

std::size_t observed_alphabet_size(const std::vector<std::string>& corpus) {
  return char_counts(corpus).size();
}

WordEntropyStats word_char_entropy_stats(
    const std::vector<std::string>& corpus) {
  std::set<std::string> types;
  for (const auto& line : corpus) {
    std::istringstream in(line);
    std::string w;
    while (in >> w) types.insert(w);
  }
  if (types.empty()) throw EmptyCorpus("no words in corpus");

  std::vector<double> entropies;
  entropies.reserve(types.size());
  for (const auto& word : types)
    entropies.push_back(entropy_of_counts(char_counts({word})));
  std::sort(entropies.begin(), entropies.end());

  WordEntropyStats stats;
  stats.max = entropies.back();
  stats.median = entropies[(entropies.size() - 1) / 2];
  double sum = 0;
  for (double h : entropies) sum += h;
  stats.average = sum / static_cast<double>(entropies.size());
  return stats;
}

double redundancy(const std::vector<std::string>& corpus,
                  std::size_t declared_alphabet) {
  std::size_t v =
      declared_alphabet ? declared_alphabet : observed_alphabet_size(corpus);
  if (v < 2)
    throw DegenerateAlphabet("redundancy needs an alphabet of at least 2");
  return 1.0 - char_entropy(corpus) / std::log2(static_cast<double>(v));
}

EntropyReport entropy_report(const std::vector<std::string>& corpus) {
  EntropyReport report;
  report.corpus_char_entropy = char_entropy(corpus);
  report.word_entropy = word_char_entropy_stats(corpus);
  report.alphabet_size = observed_alphabet_size(corpus);
  report.redundancy = redundancy(corpus);
  return report;
}

std::string_view matrix_kind_name(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::Ssnglm: return "ssnglm";
    case MatrixKind::PerplexityRaw: return "perplexity_raw";
    case MatrixKind::PerplexitySymmetric: return "perplexity_symmetric";
  }
  return "?";
}

SimilarityMatrix ssnglm_matrix(const LabeledCorpora& corpora,
                               const MatrixOptions& opts) {
  if (corpora.size() < 2)
    throw EmptyCorpus("similarity matrix needs at least two languages");
  SimilarityMatrix m;
  m.kind = MatrixKind::Ssnglm;
  const std::size_t n = corpora.size();
  for (const auto& [lang, lines] : corpora) m.languages.push_back(lang);

  std::vector<CharNGramLM> models;
  models.reserve(n);
  for (const auto& [lang, lines] : corpora)
    models.push_back(CharNGramLM::train(lines, opts.lm));

  m.raw.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m.raw[i][j] = models[i].corpus_score(corpora[j].second);

  minmax_normalize(m, /*include_diagonal=*/false);
  return m;
}

SimilarityMatrix perplexity_matrix(const LabeledCorpora& corpora,
                                   bool symmetrize,
                                   const MatrixOptions& opts) {
  if (corpora.size() < 2)
    throw EmptyCorpus("similarity matrix needs at least two languages");
  SimilarityMatrix m;
  m.kind = symmetrize ? MatrixKind::PerplexitySymmetric
                      : MatrixKind::PerplexityRaw;
  const std::size_t n = corpora.size();
  for (const auto& [lang, lines] : corpora) m.languages.push_back(lang);

  std::vector<CharNGramLM> models;
  models.reserve(n);
  for (const auto& [lang, lines] : corpora)
    models.push_back(CharNGramLM::train(lines, opts.lm));

  m.raw.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m.raw[i][j] = models[i].perplexity(corpora[j].second);

  minmax_normalize(m, /*include_diagonal=*/true);

  if (symmetrize) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double raw_mean = (m.raw[i][j] + m.raw[j][i]) / 2.0;
        double norm_mean = (m.normalized[i][j] + m.normalized[j][i]) / 2.0;
        m.raw[i][j] = m.raw[j][i] = raw_mean;
        m.normalized[i][j] = m.normalized[j][i] = norm_mean;
      }
  }
  return m;
}

std::string SimilarityMatrix::to_tsv(bool use_normalized) const {
  const auto& cells = use_normalized ? normalized : raw;
  std::ostringstream out;
  out << matrix_kind_name(kind);
  for (const auto& lang : languages) out << "\t" << lang;
  out << "\n";
  for (std::size_t i = 0; i < languages.size(); ++i) {
    out << languages[i];
    for (std::size_t j = 0; j < languages.size(); ++j)
      out << "\t" << format_cell(cells[i][j]);
    out << "\n";
  }
  return out.str();
}

std::string SimilarityMatrix::to_json() const {
  nlohmann::json j;
  j["languages"] = languages;
  j["kind"] = matrix_kind_name(kind);
  j["raw"] = raw;
  j["normalized"] = normalized;  // NaN serializes as null
  return j.dump(2);
}

std::vector<EvalResult> pairwise_surface_similarity(
    const std::vector<std::string>& side_a,
    const std::vector<std::string>& side_b,
    const std::vector<Metric>& metrics) {
  if (side_a.size() != side_b.size())
    throw AlignmentMismatch("surface similarity needs aligned corpora");
  std::vector<EvalResult> results;
  for (Metric metric : metrics) {
    switch (metric) {
      case Metric::Bleu: results.push_back(bleu(side_a, side_b)); break;
      case Metric::CharBleu:
        results.push_back(char_bleu(side_a, side_b));
        break;
      case Metric::Chrf2: results.push_back(chrf2(side_a, side_b)); break;
      case Metric::Ter: results.push_back(ter(side_a, side_b)); break;
      case Metric::Wer: results.push_back(wer(side_a, side_b)); break;
    }
  }
  return results;
}

}  // namespace wxpipe
