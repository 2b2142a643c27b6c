#include "wxpipe/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wxpipe/errors.hpp"
#include "wxpipe/utf8.hpp"
#include "wxpipe/version.hpp"

namespace wxpipe {

namespace {

constexpr double kEps = 1e-9;

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

std::vector<std::string> char_tokens(std::string_view line, bool keep_space) {
  std::vector<std::string> out;
  for (char32_t cp : utf8::decode(line)) {
    if (!keep_space && (cp == U' ' || cp == U'\t')) continue;
    out.push_back(utf8::encode(cp));
  }
  return out;
}

void require_aligned(std::size_t hyp, std::size_t ref) {
  if (hyp != ref)
    throw AlignmentMismatch("hypothesis has " + std::to_string(hyp) +
                            " lines, reference has " + std::to_string(ref));
}

using Tokens = std::vector<std::string>;

std::map<Tokens, std::size_t> ngram_counts(const Tokens& tokens, int order) {
  std::map<Tokens, std::size_t> counts;
  if (static_cast<int>(tokens.size()) < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i)
    ++counts[Tokens(tokens.begin() + i, tokens.begin() + i + order)];
  return counts;
}

struct OrderStats {
  std::size_t matched = 0;
  std::size_t hyp_total = 0;
  std::size_t ref_total = 0;
};

// Clipped n-gram statistics summed over the corpus, one entry per order.
std::vector<OrderStats> corpus_ngram_stats(
    const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
    int max_order) {
  std::vector<OrderStats> stats(max_order);
  for (std::size_t line = 0; line < hyps.size(); ++line) {
    for (int o = 1; o <= max_order; ++o) {
      auto hyp_counts = ngram_counts(hyps[line], o);
      auto ref_counts = ngram_counts(refs[line], o);
      auto& s = stats[o - 1];
      for (const auto& [g, n] : hyp_counts) {
        s.hyp_total += n;
        auto it = ref_counts.find(g);
        if (it != ref_counts.end()) s.matched += std::min(n, it->second);
      }
      for (const auto& [g, n] : ref_counts) s.ref_total += n;
    }
  }
  return stats;
}

std::size_t levenshtein(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

EvalResult bleu_like(Metric metric, const std::vector<Tokens>& hyps,
                     const std::vector<Tokens>& refs, int max_order,
                     BleuMode mode) {
  auto stats = corpus_ngram_stats(hyps, refs, max_order);
  double hyp_len = 0, ref_len = 0;
  for (const auto& t : hyps) hyp_len += static_cast<double>(t.size());
  for (const auto& t : refs) ref_len += static_cast<double>(t.size());
  if (ref_len == 0) throw EmptyReference("reference corpus is empty");

  EvalResult result;
  result.metric = metric;
  result.details["hyp_length"] = hyp_len;
  result.details["ref_length"] = ref_len;

  double log_sum = 0.0, literal_product = 1.0;
  int effective_orders = 0;
  bool zero_unigram = false;
  for (int o = 1; o <= max_order; ++o) {
    const auto& s = stats[o - 1];
    if (s.hyp_total == 0) continue;  // no n-grams of this order exist
    double p = static_cast<double>(s.matched) /
               static_cast<double>(s.hyp_total);
    result.details["precision_" + std::to_string(o)] = p;
    if (o == 1 && p == 0.0) zero_unigram = true;
    literal_product *= p;
    log_sum += std::log(p > 0.0 ? p : kEps);
    ++effective_orders;
  }

  double bp = 1.0;
  if (hyp_len < ref_len)
    bp = hyp_len == 0 ? 0.0 : std::exp(1.0 - ref_len / hyp_len);
  result.details["brevity_penalty"] = bp;

  if (effective_orders == 0 || hyp_len == 0 || zero_unigram) {
    result.score = 0.0;
  } else if (mode == BleuMode::Standard) {
    result.score = 100.0 * bp * std::exp(log_sum / effective_orders);
  } else {
    result.score = 100.0 * std::min(1.0, hyp_len / ref_len) * literal_product;
  }
  return result;
}

// One block move: take [start, start+len) out and reinsert at position
// `insert` of the remaining sequence.
Tokens move_block(const Tokens& tokens, std::size_t start, std::size_t len,
                  std::size_t insert) {
  Tokens rest;
  rest.reserve(tokens.size());
  rest.insert(rest.end(), tokens.begin(), tokens.begin() + start);
  rest.insert(rest.end(), tokens.begin() + start + len, tokens.end());
  Tokens out;
  out.reserve(tokens.size());
  out.insert(out.end(), rest.begin(), rest.begin() + insert);
  out.insert(out.end(), tokens.begin() + start, tokens.begin() + start + len);
  out.insert(out.end(), rest.begin() + insert, rest.end());
  return out;
}

// Greedy shift search: repeatedly apply the single block move that most
// reduces the edit distance.
std::pair<std::size_t, std::size_t> ter_edits_and_shifts(
    const Tokens& hyp, const Tokens& ref, int max_dist, int max_block) {
  Tokens cur = hyp;
  std::size_t shifts = 0;
  std::size_t base = levenshtein(cur, ref);
  while (base > 0 && cur.size() > 1) {
    std::size_t best_gain = 0;
    Tokens best;
    for (std::size_t start = 0; start < cur.size(); ++start) {
      for (std::size_t len = 1;
           len <= std::min<std::size_t>(max_block, cur.size() - start);
           ++len) {
        std::size_t lo = start > static_cast<std::size_t>(max_dist)
                             ? start - max_dist
                             : 0;
        std::size_t hi = std::min(cur.size() - len,
                                  start + static_cast<std::size_t>(max_dist));
        for (std::size_t insert = lo; insert <= hi; ++insert) {
          if (insert == start) continue;
          Tokens moved = move_block(cur, start, len, insert);
          std::size_t d = levenshtein(moved, ref);
          if (d < base && base - d > best_gain) {
            best_gain = base - d;
            best = std::move(moved);
          }
        }
      }
    }
    if (best_gain == 0) break;
    cur = std::move(best);
    base -= best_gain;
    ++shifts;
  }
  return {base, shifts};
}

std::string make_signature(std::string_view metric,
                           std::string_view params) {
  std::string s = "wxpipe:" + std::string(metric);
  if (!params.empty()) s += "|" + std::string(params);
  s += "|v";
  s += kVersion;
  return s;
}

}  // namespace

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Bleu: return "bleu";
    case Metric::CharBleu: return "char_bleu";
    case Metric::Chrf2: return "chrf2";
    case Metric::Ter: return "ter";
    case Metric::Wer: return "wer";
  }
  return "?";
}

Metric metric_from_name(std::string_view name) {
  if (name == "bleu") return Metric::Bleu;
  if (name == "char_bleu") return Metric::CharBleu;
  if (name == "chrf2") return Metric::Chrf2;
  if (name == "ter") return Metric::Ter;
  if (name == "wer") return Metric::Wer;
  throw FormatError("unknown metric: " + std::string(name));
}

EvalResult bleu(const std::vector<std::string>& hyp,
                const std::vector<std::string>& ref, int max_order,
                BleuMode mode) {
  require_aligned(hyp.size(), ref.size());
  std::vector<Tokens> hyps, refs;
  for (const auto& line : hyp) hyps.push_back(tokenize(line));
  for (const auto& line : ref) refs.push_back(tokenize(line));
  auto result = bleu_like(Metric::Bleu, hyps, refs, max_order, mode);
  result.signature = make_signature(
      "bleu", "order:" + std::to_string(max_order) + "|mode:" +
                  (mode == BleuMode::Standard ? "standard" : "literal"));
  return result;
}

EvalResult char_bleu(const std::vector<std::string>& hyp,
                     const std::vector<std::string>& ref, int max_order) {
  require_aligned(hyp.size(), ref.size());
  std::vector<Tokens> hyps, refs;
  for (const auto& line : hyp) hyps.push_back(char_tokens(line, true));
  for (const auto& line : ref) refs.push_back(char_tokens(line, true));
  auto result =
      bleu_like(Metric::CharBleu, hyps, refs, max_order, BleuMode::Standard);
  result.metric = Metric::CharBleu;
  result.signature =
      make_signature("char_bleu", "order:" + std::to_string(max_order));
  return result;
}

EvalResult chrf2(const std::vector<std::string>& hyp,
                 const std::vector<std::string>& ref, int char_order,
                 double beta) {
  require_aligned(hyp.size(), ref.size());
  std::vector<Tokens> hyps, refs;
  for (const auto& line : hyp) hyps.push_back(char_tokens(line, false));
  for (const auto& line : ref) refs.push_back(char_tokens(line, false));
  auto stats = corpus_ngram_stats(hyps, refs, char_order);

  double precision_sum = 0, recall_sum = 0;
  int orders = 0;
  for (const auto& s : stats) {
    if (s.hyp_total == 0 && s.ref_total == 0) continue;
    precision_sum += s.hyp_total
                         ? static_cast<double>(s.matched) /
                               static_cast<double>(s.hyp_total)
                         : 0.0;
    recall_sum += s.ref_total ? static_cast<double>(s.matched) /
                                    static_cast<double>(s.ref_total)
                              : 0.0;
    ++orders;
  }

  EvalResult result;
  result.metric = Metric::Chrf2;
  result.signature = make_signature(
      "chrf2", "order:" + std::to_string(char_order) +
                   "|beta:" + std::to_string(static_cast<int>(beta)));
  if (orders == 0) return result;
  double p = precision_sum / orders;
  double r = recall_sum / orders;
  double b2 = beta * beta;
  result.details["precision"] = p;
  result.details["recall"] = r;
  result.score =
      (p + r > 0) ? 100.0 * (1 + b2) * p * r / (b2 * p + r) : 0.0;
  return result;
}

EvalResult wer(const std::vector<std::string>& hyp,
               const std::vector<std::string>& ref) {
  require_aligned(hyp.size(), ref.size());
  std::size_t edits = 0, ref_words = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    Tokens h = tokenize(hyp[i]), r = tokenize(ref[i]);
    edits += levenshtein(h, r);
    ref_words += r.size();
  }
  if (ref_words == 0) throw EmptyReference("reference corpus is empty");
  EvalResult result;
  result.metric = Metric::Wer;
  result.score =
      100.0 * static_cast<double>(edits) / static_cast<double>(ref_words);
  result.details["edits"] = static_cast<double>(edits);
  result.details["ref_words"] = static_cast<double>(ref_words);
  result.signature = make_signature("wer", "");
  return result;
}

EvalResult ter(const std::vector<std::string>& hyp,
               const std::vector<std::string>& ref, int max_shift_distance,
               int max_block_length) {
  require_aligned(hyp.size(), ref.size());
  std::size_t edits = 0, shifts = 0, ref_words = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    Tokens h = tokenize(hyp[i]), r = tokenize(ref[i]);
    auto [e, s] =
        ter_edits_and_shifts(h, r, max_shift_distance, max_block_length);
    edits += e;
    shifts += s;
    ref_words += r.size();
  }
  if (ref_words == 0) throw EmptyReference("reference corpus is empty");
  EvalResult result;
  result.metric = Metric::Ter;
  result.score = static_cast<double>(edits + shifts) /
                 static_cast<double>(ref_words);
  result.details["edits"] = static_cast<double>(edits);
  result.details["shifts"] = static_cast<double>(shifts);
  result.details["ref_words"] = static_cast<double>(ref_words);
  result.signature = make_signature(
      "ter", "shift_dist:" + std::to_string(max_shift_distance) +
                 "|block:" + std::to_string(max_block_length));
  return result;
}

}  // namespace wxpipe
