#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wxpipe/analysis.hpp"
#include "wxpipe/bpe.hpp"
#include "wxpipe/script_table.hpp"
#include "wxpipe/wx_codec.hpp"

namespace wxpipe {

// File helpers shared by the pipeline and the CLI. All writes go through a
// temp-file-then-rename step so partial output never lands under its final
// name.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);
void write_lines_atomic(const std::filesystem::path& path,
                        const std::vector<std::string>& lines);

struct PairSpec {
  std::string source_lang;
  std::string target_lang;
  ScriptId source_script = ScriptId::Devanagari;
  ScriptId target_script = ScriptId::Devanagari;
  // split name -> (source path, target path); standard splits are
  // train/valid/test, train may be absent for zero-shot pairs
  std::map<std::string, std::pair<std::string, std::string>> splits;

  std::string label() const { return source_lang + "-" + target_lang; }
};

struct Manifest {
  std::filesystem::path base_dir;  // manifest location, resolves paths
  std::filesystem::path output_dir;
  BpeOptions bpe;
  int lm_order = 6;
  bool joint_bpe = false;
  bool allow_lossy = false;
  std::vector<PairSpec> pairs;

  static Manifest parse(std::string_view text,
                        const std::filesystem::path& base_dir);
  static Manifest load(const std::filesystem::path& path);

  std::filesystem::path resolve(const std::string& path) const;
  /// Deterministic FNV-1a hash over the normalized settings.
  std::string settings_hash() const;
};

struct PipelineRun {
  std::string run_id;
  std::filesystem::path dir;
  std::string record_json;

  static PipelineRun load(const std::filesystem::path& dir);
};

/// Encodes every split of every pair into WX, learns and applies BPE, and
/// records span annotations plus a run record. Malformed lines are
/// repaired, flagged and counted, never fatal.
PipelineRun prepare(const Manifest& manifest);

struct PostprocessStats {
  std::size_t lines = 0;
  std::size_t flagged = 0;  // lines left in WX because decode complained
};

/// Reverses the preparation of hypotheses: undo BPE, then decode to the
/// pair's target script. With a span file from prepare, passthrough
/// regions are restored byte-exactly.
PostprocessStats postprocess(const std::filesystem::path& run_dir,
                             const std::string& pair_label,
                             const std::filesystem::path& hyp_file,
                             const std::filesystem::path& out_file,
                             const std::optional<std::filesystem::path>&
                                 span_file = std::nullopt);

struct AnalyzeRequest {
  LabeledCorpora corpora;  // monolingual corpora for entropy/ssnglm/ppl
  std::vector<std::pair<std::string,
                        std::pair<std::vector<std::string>,
                                  std::vector<std::string>>>>
      surface_pairs;  // label -> (side A, side B), already same script
  std::vector<std::string> which = {"entropy", "redundancy", "ssnglm",
                                    "perplexity"};
  int lm_order = 6;
  // restricted-corpus mode: analyze only the first N lines (0 = all)
  std::size_t max_lines = 0;
  std::filesystem::path out_dir;
};

/// Writes TSV and JSON reports; returns the emitted paths.
std::vector<std::filesystem::path> analyze(const AnalyzeRequest& request);

/// Builds an analyze request from a manifest: per-language corpora from
/// the training (or first) split in native script, and per-pair surface
/// sides WX-encoded so both sit in the same character space.
AnalyzeRequest analyze_request_from_manifest(
    const Manifest& manifest, const std::vector<std::string>& which);

/// Runs the requested metrics and writes one JSON record per metric.
std::vector<EvalResult> evaluate_files(
    const std::filesystem::path& hyp_file,
    const std::filesystem::path& ref_file,
    const std::vector<Metric>& metrics,
    const std::optional<std::filesystem::path>& out_file = std::nullopt);

}  // namespace wxpipe
