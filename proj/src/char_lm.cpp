#include "wxpipe/char_lm.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "wxpipe/errors.hpp"
#include "wxpipe/utf8.hpp"

namespace wxpipe {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Conventional sentinel for "no probability" in the text format.
constexpr double kDummyLog10 = -99.0;

using Counts = std::map<std::u32string, std::uint64_t>;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string symbol_to_text(char32_t c) {
  switch (c) {
    case CharNGramLM::kBos: return "<s>";
    case CharNGramLM::kEos: return "</s>";
    case CharNGramLM::kUnk: return "<unk>";
    default: break;
  }
  if (c <= 0x20 || c == 0x7F) {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "U+%04X", static_cast<unsigned>(c));
    return buf;
  }
  return utf8::encode(c);
}

char32_t symbol_from_text(const std::string& token, std::string_view origin) {
  if (token == "<s>") return CharNGramLM::kBos;
  if (token == "</s>") return CharNGramLM::kEos;
  if (token == "<unk>") return CharNGramLM::kUnk;
  if (token.size() >= 3 && token[0] == 'U' && token[1] == '+') {
    unsigned cp = 0;
    if (std::sscanf(token.c_str() + 2, "%x", &cp) == 1 && cp <= 0x10FFFF)
      return static_cast<char32_t>(cp);
  }
  std::u32string cps = utf8::decode(token);
  if (cps.size() != 1)
    throw FormatError(std::string(origin) + ": bad symbol token '" + token +
                      "'");
  return cps[0];
}

}  // namespace

std::string_view smoothing_name(Smoothing s) {
  switch (s) {
    case Smoothing::KneserNey: return "kneser_ney";
    case Smoothing::WittenBell: return "witten_bell";
    case Smoothing::Mle: return "mle";
    case Smoothing::Uniform: return "uniform";
  }
  return "?";
}

Smoothing smoothing_from_name(std::string_view name) {
  if (name == "kneser_ney") return Smoothing::KneserNey;
  if (name == "witten_bell") return Smoothing::WittenBell;
  if (name == "mle") return Smoothing::Mle;
  if (name == "uniform") return Smoothing::Uniform;
  throw FormatError("unknown smoothing mode: " + std::string(name));
}

CharNGramLM CharNGramLM::train(const std::vector<std::string>& corpus,
                               const LmOptions& opts) {
  if (opts.order < 1) throw InvalidOrder("order must be >= 1");
  if (corpus.empty()) throw EmptyCorpus("cannot train on an empty corpus");
  const int n = opts.order;

  // N-gram counts for orders 1..n over windows ending at scored positions.
  std::vector<Counts> counts(n);
  std::set<char32_t> chars;
  std::uint64_t events = 0;
  for (const auto& line : corpus) {
    std::u32string seq(static_cast<std::size_t>(n - 1), kBos);
    for (char32_t cp : utf8::decode(line)) {
      seq.push_back(cp);
      chars.insert(cp);
    }
    if (opts.include_eos) seq.push_back(kEos);
    for (std::size_t i = static_cast<std::size_t>(n - 1); i < seq.size();
         ++i) {
      ++events;
      for (int o = 1; o <= n; ++o)
        ++counts[o - 1][seq.substr(i + 1 - o, o)];
    }
  }
  if (events == 0) throw EmptyCorpus("corpus has no scorable events");

  CharNGramLM lm;
  lm.opts_ = opts;
  lm.alphabet_ = std::move(chars);
  lm.alphabet_.insert(kUnk);
  if (opts.include_eos) lm.alphabet_.insert(kEos);
  const double uniform = 1.0 / static_cast<double>(lm.alphabet_.size());

  lm.probs_.resize(n);
  lm.backoffs_.resize(n > 1 ? n - 1 : 0);

  if (opts.smoothing == Smoothing::Uniform) {
    for (char32_t c : lm.alphabet_)
      lm.probs_[0][std::u32string(1, c)] = std::log10(uniform);
    return lm;
  }

  // Context totals and distinct-extension counts per order.
  auto group_contexts = [](const Counts& grams) {
    std::map<std::u32string, std::pair<std::uint64_t, std::uint64_t>> ctx;
    for (const auto& [g, cnt] : grams) {
      auto& [total, types] = ctx[g.substr(0, g.size() - 1)];
      total += cnt;
      types += 1;
    }
    return ctx;
  };

  if (opts.smoothing == Smoothing::Mle) {
    for (int o = 1; o <= n; ++o) {
      auto ctx = group_contexts(counts[o - 1]);
      for (const auto& [g, cnt] : counts[o - 1]) {
        double den = static_cast<double>(
            ctx.at(g.substr(0, g.size() - 1)).first);
        lm.probs_[o - 1][g] =
            std::log10(static_cast<double>(cnt) / den);
      }
    }
    return lm;
  }

  // Continuation counts for the lower orders of Kneser-Ney: cc[g] is the
  // number of distinct symbols preceding g.
  std::vector<Counts> cont(n > 1 ? n - 1 : 0);
  for (int o = 1; o < n; ++o)
    for (const auto& [g, cnt] : counts[o])  // (o+1)-grams
      ++cont[o - 1][g.substr(1)];

  const double d = opts.discount;
  const bool kn = opts.smoothing == Smoothing::KneserNey;

  // Bottom-up interpolated probabilities for every observed n-gram. The
  // lower-order estimate of a gram is always present because every suffix
  // of a collected window is itself a collected window.
  for (int o = 1; o <= n; ++o) {
    const Counts& table = (kn && o < n) ? cont[o - 1] : counts[o - 1];
    auto ctx = group_contexts(table);
    for (const auto& [g, cnt] : table) {
      auto [total, types] = ctx.at(g.substr(0, g.size() - 1));
      double count = static_cast<double>(cnt);
      double den = static_cast<double>(total);
      double t = static_cast<double>(types);
      // Base distribution: uniform over the alphabet at order 1, the
      // already-computed lower-order estimate otherwise.
      double lower = o == 1
                         ? uniform
                         : std::pow(10.0, lm.probs_[o - 2].at(g.substr(1)));
      double p = kn ? std::max(count - d, 0.0) / den + d * t / den * lower
                    : (count + t * lower) / (den + t);
      lm.probs_[o - 1][g] = std::log10(p);
    }
    // The unseen-symbol unigram carries the leftover interpolation mass.
    if (o == 1) {
      auto [total, types] = ctx.at(std::u32string());
      double den = static_cast<double>(total);
      double t = static_cast<double>(types);
      double p_unk = kn ? d * t / den * uniform : t * uniform / (den + t);
      lm.probs_[0][std::u32string(1, kUnk)] = std::log10(p_unk);
    }
  }

  // Backoff weights: alpha(ctx) scales the lower-order distribution over
  // symbols unseen after ctx so each context still sums to one.
  for (int o = 1; o < n; ++o) {
    std::map<std::u32string, std::pair<double, double>> sums;
    const Counts& upper = (kn && o + 1 < n) ? cont[o] : counts[o];
    for (const auto& [g, cnt] : upper) {
      auto& [seen, seen_lower] = sums[g.substr(0, g.size() - 1)];
      seen += std::pow(10.0, lm.probs_[o].at(g));
      seen_lower += std::pow(10.0, lm.probs_[o - 1].at(g.substr(1)));
    }
    for (const auto& [c, s] : sums) {
      double num = std::max(1.0 - s.first, 0.0);
      double den = std::max(1.0 - s.second, 0.0);
      lm.backoffs_[o - 1][c] =
          den > 0 ? std::log10(num / den) : 0.0;
    }
  }
  return lm;
}

double CharNGramLM::log10_prob(std::u32string_view context,
                               char32_t symbol) const {
  const int n = opts_.order;
  if (!alphabet_.count(symbol)) symbol = kUnk;
  std::size_t m = std::min(context.size(),
                           static_cast<std::size_t>(n - 1));
  std::u32string_view ctx = context.substr(context.size() - m);

  if (opts_.smoothing == Smoothing::Mle) {
    std::u32string gram(ctx);
    gram.push_back(symbol);
    auto it = probs_[m].find(gram);
    return it == probs_[m].end() ? kNegInf : it->second;
  }

  double alpha = 0.0;
  for (std::size_t o = m + 1; o >= 1; --o) {
    std::u32string gram(ctx.substr(m - (o - 1)));
    gram.push_back(symbol);
    auto it = probs_[o - 1].find(gram);
    if (it != probs_[o - 1].end()) return alpha + it->second;
    if (o >= 2) {
      auto b = backoffs_[o - 2].find(std::u32string(ctx.substr(m - (o - 1))));
      if (b != backoffs_[o - 2].end()) alpha += b->second;
    }
  }
  return kNegInf;
}

double CharNGramLM::prob(std::u32string_view context, char32_t symbol) const {
  return std::pow(10.0, log10_prob(context, symbol));
}

SentenceScore CharNGramLM::sentence_logprob(std::string_view line) const {
  const int n = opts_.order;
  std::u32string seq(static_cast<std::size_t>(n - 1), kBos);
  for (char32_t cp : utf8::decode(line)) seq.push_back(cp);
  if (opts_.include_eos) seq.push_back(kEos);

  SentenceScore score;
  for (std::size_t i = static_cast<std::size_t>(n - 1); i < seq.size(); ++i) {
    std::size_t begin = i - static_cast<std::size_t>(n - 1);
    score.total_log10_prob += log10_prob(
        std::u32string_view(seq).substr(begin, n - 1), seq[i]);
    ++score.scored_tokens;
  }
  return score;
}

double CharNGramLM::corpus_score(
    const std::vector<std::string>& corpus) const {
  if (corpus.empty()) throw EmptyCorpus("cannot score an empty corpus");
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& line : corpus) {
    auto s = sentence_logprob(line);
    total += s.total_log10_prob;
    tokens += s.scored_tokens;
  }
  if (tokens == 0) throw EmptyCorpus("corpus has no scorable events");
  return total / static_cast<double>(tokens);
}

double CharNGramLM::perplexity(const std::vector<std::string>& corpus) const {
  double avg = corpus_score(corpus);
  if (avg == kNegInf) return std::numeric_limits<double>::infinity();
  return std::pow(10.0, -avg);
}

std::string CharNGramLM::to_arpa() const {
  if (probs_.empty() || probs_[0].empty())
    throw FormatError("refusing to save an empty model");
  const int n = opts_.order;

  // Contexts that never end at a scored position (BOS-grams) still need a
  // line for their backoff weight; they get the conventional dummy prob.
  std::vector<std::map<std::u32string, std::pair<double, const double*>>>
      rows(n);
  for (int o = 1; o <= n; ++o)
    for (const auto& [g, lp] : probs_[o - 1])
      rows[o - 1][g] = {lp, nullptr};
  for (int o = 1; o < n; ++o)
    for (const auto& [c, a] : backoffs_[o - 1]) {
      auto it = rows[o - 1].find(c);
      if (it == rows[o - 1].end())
        rows[o - 1][c] = {kDummyLog10, &a};
      else
        it->second.second = &a;
    }

  std::ostringstream out;
  out << "# wxpipe-charlm order=" << n << " smoothing="
      << smoothing_name(opts_.smoothing) << " discount=" << opts_.discount
      << " include_eos=" << (opts_.include_eos ? 1 : 0) << "\n\n";
  out << "\\data\\\n";
  for (int o = 1; o <= n; ++o)
    out << "ngram " << o << "=" << rows[o - 1].size() << "\n";
  out << "\n";
  for (int o = 1; o <= n; ++o) {
    out << "\\" << o << "-grams:\n";
    for (const auto& [g, row] : rows[o - 1]) {
      out << format_double(row.first) << "\t";
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) out << " ";
        out << symbol_to_text(g[i]);
      }
      if (row.second) out << "\t" << format_double(*row.second);
      out << "\n";
    }
    out << "\n";
  }
  out << "\\end\\\n";
  return out.str();
}

void CharNGramLM::save_arpa(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write ARPA file: " + path);
  out << to_arpa();
}

CharNGramLM CharNGramLM::from_arpa(std::string_view text,
                                   std::string_view origin) {
  CharNGramLM lm;
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::size_t> declared;
  bool in_data = false;
  int current_order = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!header_seen && line.rfind("# wxpipe-charlm ", 0) == 0) {
        header_seen = true;
        std::istringstream fields(line.substr(16));
        std::string field;
        try {
          while (fields >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos) continue;
            std::string key = field.substr(0, eq),
                        value = field.substr(eq + 1);
            if (key == "order")
              lm.opts_.order = std::stoi(value);
            else if (key == "smoothing")
              lm.opts_.smoothing = smoothing_from_name(value);
            else if (key == "discount")
              lm.opts_.discount = std::stod(value);
            else if (key == "include_eos")
              lm.opts_.include_eos = value == "1";
          }
        } catch (const std::logic_error&) {
          throw FormatError(std::string(origin) + ": bad header line");
        }
      }
      continue;
    }
    if (line == "\\data\\") {
      in_data = true;
      continue;
    }
    if (line == "\\end\\") break;
    if (line.rfind("ngram ", 0) == 0 && in_data && current_order == 0) {
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw FormatError(std::string(origin) + ": bad ngram count line");
      try {
        declared.push_back(std::stoull(line.substr(eq + 1)));
      } catch (const std::logic_error&) {
        throw FormatError(std::string(origin) + ": bad ngram count line");
      }
      continue;
    }
    if (line[0] == '\\' && line.size() > 7 &&
        line.substr(line.size() - 7) == "-grams:") {
      try {
        current_order = std::stoi(line.substr(1));
      } catch (const std::logic_error&) {
        throw FormatError(std::string(origin) + ": bad order header");
      }
      if (current_order < 1 ||
          current_order > static_cast<int>(declared.size()))
        throw FormatError(std::string(origin) + ": unexpected order block");
      lm.probs_.resize(declared.size());
      lm.backoffs_.resize(declared.size() > 1 ? declared.size() - 1 : 0);
      continue;
    }
    if (current_order == 0)
      throw FormatError(std::string(origin) + ": content outside any block");

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() < 2)
      throw FormatError(std::string(origin) + ": bad n-gram line '" + line +
                        "'");
    try {
      double logp = std::stod(fields[0]);
      std::u32string gram;
      std::istringstream tokens(fields[1]);
      std::string token;
      while (tokens >> token) gram.push_back(symbol_from_text(token, origin));
      if (gram.size() != static_cast<std::size_t>(current_order))
        throw FormatError(std::string(origin) + ": order mismatch in '" +
                          line + "'");
      if (logp > kDummyLog10 + 0.5)
        lm.probs_[current_order - 1][gram] = logp;
      if (fields.size() >= 3 &&
          current_order <= static_cast<int>(declared.size()) - 1)
        lm.backoffs_[current_order - 1][gram] = std::stod(fields[2]);
    } catch (const std::logic_error&) {
      throw FormatError(std::string(origin) + ": bad numeric field in '" +
                        line + "'");
    }
  }

  if (declared.empty() || lm.probs_.empty() || lm.probs_[0].empty())
    throw FormatError(std::string(origin) + ": no unigram entries");
  if (!header_seen) lm.opts_.order = static_cast<int>(declared.size());

  for (const auto& [g, lp] : lm.probs_[0]) {
    if (g[0] != kBos) lm.alphabet_.insert(g[0]);
  }
  return lm;
}

CharNGramLM CharNGramLM::load_arpa(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open ARPA file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_arpa(buf.str(), path);
}

}  // namespace wxpipe
