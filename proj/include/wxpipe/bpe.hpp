#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wxpipe {

struct BpeOptions {
  std::size_t merge_count = 5000;
  std::size_t vocab_cap = 5000;
  std::size_t min_pair_freq = 2;
  std::string boundary_marker = "▁";
};

/// Byte-pair-encoding subword model: an ordered merge list plus the
/// vocabulary of the final training segmentation. Merges operate on plain
/// character streams; the boundary marker is carried by word-initial
/// tokens. Immutable once learned; apply/undo are pure.
class BpeModel {
 public:
  BpeModel() = default;

  /// Greedy highest-frequency pair merging with lexicographic tie-break.
  /// Stops at merge_count merges, when no pair reaches min_pair_freq, or
  /// when the vocabulary would exceed vocab_cap. Throws EmptyCorpus.
  static BpeModel learn(const std::vector<std::string>& corpus,
                        const BpeOptions& opts = {});

  /// Splits each whitespace word to characters with the boundary marker on
  /// the word-initial one, then replays the merges in learned order.
  /// Unknown characters stay as singleton tokens.
  std::vector<std::string> apply(std::string_view line) const;

  /// Same result as apply(); the caller-owned cache memoizes per-word
  /// segmentations across lines of a corpus.
  using WordCache = std::map<std::string, std::vector<std::string>>;
  std::vector<std::string> apply(std::string_view line,
                                 WordCache& cache) const;

  std::string undo(const std::vector<std::string>& tokens) const;

  std::string to_text() const;
  static BpeModel from_text(std::string_view text,
                            std::string_view origin = "<memory>");
  void save(const std::string& path) const;
  static BpeModel load(const std::string& path);

  const std::vector<std::pair<std::string, std::string>>& merges() const {
    return merges_;
  }
  const std::map<std::string, std::uint64_t>& vocab() const { return vocab_; }
  const BpeOptions& options() const { return opts_; }

  bool operator==(const BpeModel& other) const {
    return merges_ == other.merges_ && vocab_ == other.vocab_ &&
           opts_.boundary_marker == other.opts_.boundary_marker;
  }

 private:
  BpeOptions opts_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::map<std::string, std::uint64_t> vocab_;

  void replay(std::vector<std::string>& symbols) const;
};

/// Inverse of apply: concatenates tokens, turning boundary markers back
/// into single spaces.
std::string undo_bpe(const std::vector<std::string>& tokens,
                     std::string_view marker = "▁");

}  // namespace wxpipe
