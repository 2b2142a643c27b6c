#pragma once

// Brute-force reference implementations for the evaluation metrics:
// joined-string n-gram keys, a full-matrix edit-distance DP and exhaustive
// shift enumeration. Test-only; shares no code with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wxpipe/utf8.hpp"

namespace testsupport {

inline std::vector<std::string> words_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline std::vector<std::string> chars_of(const std::string& line,
                                         bool keep_space) {
  std::vector<std::string> out;
  for (char32_t c : wxpipe::utf8::decode(line)) {
    if (!keep_space && (c == U' ' || c == U'\t')) continue;
    out.push_back(wxpipe::utf8::encode(c));
  }
  return out;
}

inline std::map<std::string, int> oracle_ngrams(
    const std::vector<std::string>& t, int order) {
  std::map<std::string, int> m;
  for (int i = 0; i + order <= static_cast<int>(t.size()); ++i) {
    std::string key;
    for (int k = 0; k < order; ++k) key += t[i + k] + '\x01';
    ++m[key];
  }
  return m;
}

inline double oracle_bleu(const std::vector<std::vector<std::string>>& hyps,
                          const std::vector<std::vector<std::string>>& refs,
                          int max_order) {
  double hyp_len = 0, ref_len = 0;
  for (const auto& h : hyps) hyp_len += h.size();
  for (const auto& r : refs) ref_len += r.size();
  double log_sum = 0;
  int orders = 0;
  bool zero_p1 = false;
  for (int o = 1; o <= max_order; ++o) {
    long matched = 0, total = 0;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      auto h = oracle_ngrams(hyps[i], o);
      auto r = oracle_ngrams(refs[i], o);
      for (const auto& [g, n] : h) {
        total += n;
        auto it = r.find(g);
        if (it != r.end()) matched += std::min(n, it->second);
      }
    }
    if (total == 0) continue;
    double p = static_cast<double>(matched) / total;
    if (o == 1 && p == 0) zero_p1 = true;
    log_sum += std::log(p > 0 ? p : 1e-9);
    ++orders;
  }
  if (orders == 0 || hyp_len == 0 || zero_p1) return 0.0;
  double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / orders);
}

inline double oracle_chrf(const std::vector<std::string>& hyp,
                          const std::vector<std::string>& ref, int max_order,
                          double beta) {
  double psum = 0, rsum = 0;
  int orders = 0;
  for (int o = 1; o <= max_order; ++o) {
    long matched = 0, htotal = 0, rtotal = 0;
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      auto h = oracle_ngrams(chars_of(hyp[i], false), o);
      auto r = oracle_ngrams(chars_of(ref[i], false), o);
      for (const auto& [g, n] : h) {
        htotal += n;
        auto it = r.find(g);
        if (it != r.end()) matched += std::min(n, it->second);
      }
      for (const auto& [g, n] : r) rtotal += n;
    }
    if (htotal == 0 && rtotal == 0) continue;
    psum += htotal ? static_cast<double>(matched) / htotal : 0.0;
    rsum += rtotal ? static_cast<double>(matched) / rtotal : 0.0;
    ++orders;
  }
  if (orders == 0) return 0.0;
  double p = psum / orders, r = rsum / orders, b2 = beta * beta;
  return p + r > 0 ? 100.0 * (1 + b2) * p * r / (b2 * p + r) : 0.0;
}

inline int oracle_edit_distance(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  std::vector<std::vector<int>> d(a.size() + 1,
                                  std::vector<int>(b.size() + 1, 0));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] =
          std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                    d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

inline std::pair<int, int> oracle_ter_counts(
    std::vector<std::string> cur, const std::vector<std::string>& ref) {
  int shifts = 0;
  int base = oracle_edit_distance(cur, ref);
  while (base > 0 && cur.size() > 1) {
    int best_gain = 0;
    std::vector<std::string> best;
    for (std::size_t start = 0; start < cur.size(); ++start) {
      for (std::size_t len = 1; len + start <= cur.size() && len <= 10;
           ++len) {
        std::vector<std::string> rest(cur.begin(), cur.begin() + start);
        rest.insert(rest.end(), cur.begin() + start + len, cur.end());
        std::size_t lo = start > 10 ? start - 10 : 0;
        std::size_t hi = std::min(rest.size(), start + 10);
        for (std::size_t ins = lo; ins <= hi; ++ins) {
          if (ins == start) continue;
          std::vector<std::string> moved(rest.begin(), rest.begin() + ins);
          moved.insert(moved.end(), cur.begin() + start,
                       cur.begin() + start + len);
          moved.insert(moved.end(), rest.begin() + ins, rest.end());
          int d = oracle_edit_distance(moved, ref);
          if (base - d > best_gain) {
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

}  // namespace testsupport
