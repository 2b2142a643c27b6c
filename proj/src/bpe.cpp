#include "wxpipe/bpe.hpp"

#include <fstream>
#include <sstream>

#include "wxpipe/errors.hpp"
#include "wxpipe/utf8.hpp"

namespace wxpipe {

namespace {

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> words;
  std::istringstream in{std::string(line)};
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

// Word-initial characters carry the boundary marker as part of the symbol,
// so word-initial and word-internal statistics stay distinct and each merge
// adds exactly one vocabulary symbol.
std::vector<std::string> split_chars(std::string_view word,
                                     std::string_view marker) {
  std::vector<std::string> out;
  for (char32_t cp : utf8::decode(word)) {
    if (out.empty())
      out.push_back(std::string(marker) + utf8::encode(cp));
    else
      out.push_back(utf8::encode(cp));
  }
  return out;
}

// One left-to-right pass merging every non-overlapping occurrence; used
// identically during learning and application so replay reproduces the
// training segmentation.
void merge_pass(std::vector<std::string>& symbols, const std::string& left,
                const std::string& right) {
  if (symbols.size() < 2) return;
  std::vector<std::string> out;
  out.reserve(symbols.size());
  std::size_t i = 0;
  while (i < symbols.size()) {
    if (i + 1 < symbols.size() && symbols[i] == left &&
        symbols[i + 1] == right) {
      out.push_back(left + right);
      i += 2;
    } else {
      out.push_back(std::move(symbols[i]));
      ++i;
    }
  }
  symbols.swap(out);
}

}  // namespace

BpeModel BpeModel::learn(const std::vector<std::string>& corpus,
                         const BpeOptions& opts) {
  std::map<std::string, std::uint64_t> word_counts;
  for (const auto& line : corpus)
    for (auto& w : split_words(line)) ++word_counts[w];
  if (word_counts.empty())
    throw EmptyCorpus("no words after whitespace tokenization");

  BpeModel model;
  model.opts_ = opts;

  std::vector<std::pair<std::vector<std::string>, std::uint64_t>> words;
  words.reserve(word_counts.size());
  for (const auto& [w, n] : word_counts)
    words.emplace_back(split_chars(w, opts.boundary_marker), n);

  auto count_vocab = [&words] {
    std::map<std::string, std::uint64_t> vocab;
    for (const auto& [symbols, n] : words)
      for (const auto& s : symbols) vocab[s] += n;
    return vocab;
  };

  using Pair = std::pair<std::string, std::string>;
  while (model.merges_.size() < opts.merge_count) {
    std::map<Pair, std::uint64_t> pair_counts;
    for (const auto& [symbols, n] : words)
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
        pair_counts[{symbols[i], symbols[i + 1]}] += n;
    model.vocab_ = count_vocab();

    const Pair* best = nullptr;
    std::uint64_t best_count = 0;
    for (const auto& [pair, n] : pair_counts) {
      if (n > best_count) {  // map order makes ties lexicographic-smallest
        best = &pair;
        best_count = n;
      }
    }
    if (!best || best_count < opts.min_pair_freq) break;

    // Would the merged symbol push the vocabulary past its cap?
    if (!model.vocab_.count(best->first + best->second) &&
        model.vocab_.size() >= opts.vocab_cap)
      break;

    for (auto& [symbols, n] : words)
      merge_pass(symbols, best->first, best->second);
    model.merges_.push_back(*best);
  }

  // Final segmentation decides the stored vocabulary.
  model.vocab_ = count_vocab();
  return model;
}

void BpeModel::replay(std::vector<std::string>& symbols) const {
  for (const auto& [left, right] : merges_) merge_pass(symbols, left, right);
}

std::vector<std::string> BpeModel::apply(std::string_view line) const {
  std::vector<std::string> out;
  for (const auto& word : split_words(line)) {
    std::vector<std::string> symbols =
        split_chars(word, opts_.boundary_marker);
    replay(symbols);
    for (auto& s : symbols) out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> BpeModel::apply(std::string_view line,
                                         WordCache& cache) const {
  std::vector<std::string> out;
  for (const auto& word : split_words(line)) {
    auto it = cache.find(word);
    if (it == cache.end()) {
      std::vector<std::string> symbols =
          split_chars(word, opts_.boundary_marker);
      replay(symbols);
      it = cache.emplace(word, std::move(symbols)).first;
    }
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

std::string BpeModel::undo(const std::vector<std::string>& tokens) const {
  return undo_bpe(tokens, opts_.boundary_marker);
}

std::string undo_bpe(const std::vector<std::string>& tokens,
                     std::string_view marker) {
  std::string out;
  for (const auto& token : tokens) {
    std::string_view t = token;
    if (t.substr(0, marker.size()) == marker) {
      if (!out.empty()) out += ' ';
      t.remove_prefix(marker.size());
    }
    out += t;
  }
  return out;
}

std::string BpeModel::to_text() const {
  std::ostringstream out;
  out << "wxpipe-bpe 1 marker=" << opts_.boundary_marker
      << " merge_count=" << opts_.merge_count
      << " vocab_cap=" << opts_.vocab_cap
      << " min_pair_freq=" << opts_.min_pair_freq << "\n";
  for (const auto& [left, right] : merges_)
    out << left << " " << right << "\n";
  out << "#vocab\n";
  for (const auto& [symbol, count] : vocab_)
    out << symbol << "\t" << count << "\n";
  return out.str();
}

BpeModel BpeModel::from_text(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("wxpipe-bpe 1 ", 0) != 0)
    throw FormatError(std::string(origin) + ": not a wxpipe-bpe v1 file");

  BpeModel model;
  std::istringstream header(line.substr(13));
  std::string field;
  while (header >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos)
      throw FormatError(std::string(origin) + ": bad header field '" + field +
                        "'");
    std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    try {
      if (key == "marker")
        model.opts_.boundary_marker = value;
      else if (key == "merge_count")
        model.opts_.merge_count = std::stoull(value);
      else if (key == "vocab_cap")
        model.opts_.vocab_cap = std::stoull(value);
      else if (key == "min_pair_freq")
        model.opts_.min_pair_freq = std::stoull(value);
      else
        throw FormatError(std::string(origin) + ": unknown header key '" +
                          key + "'");
    } catch (const std::logic_error&) {
      throw FormatError(std::string(origin) + ": bad header value '" + value +
                        "'");
    }
  }
  if (model.opts_.boundary_marker.empty())
    throw FormatError(std::string(origin) + ": empty boundary marker");

  bool in_vocab = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line == "#vocab") {
      in_vocab = true;
      continue;
    }
    if (!in_vocab) {
      std::istringstream fields(line);
      std::string left, right, extra;
      if (!(fields >> left >> right) || (fields >> extra))
        throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                          ": expected 'left right'");
      model.merges_.emplace_back(left, right);
    } else {
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                          ": expected 'symbol<TAB>count'");
      try {
        model.vocab_[line.substr(0, tab)] = std::stoull(line.substr(tab + 1));
      } catch (const std::logic_error&) {
        throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                          ": bad count");
      }
    }
  }
  return model;
}

void BpeModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write BPE model: " + path);
  out << to_text();
}

BpeModel BpeModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open BPE model: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path);
}

}  // namespace wxpipe
