// wxpipe: project Indic-script text into the WX character space and back,
// learn/apply BPE subwords on it, train character n-gram models, and score
// corpora with similarity, complexity and MT evaluation metrics.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wxpipe/analysis.hpp"
#include "wxpipe/bpe.hpp"
#include "wxpipe/char_lm.hpp"
#include "wxpipe/errors.hpp"
#include "wxpipe/eval_metrics.hpp"
#include "wxpipe/pipeline.hpp"
#include "wxpipe/version.hpp"
#include "wxpipe/wx_codec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> slurp_lines(const std::string& path) {
  if (path == "-") {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(std::cin, line)) lines.push_back(line);
    return lines;
  }
  return wxpipe::read_lines(path);
}

void emit_lines(const std::string& path,
                const std::vector<std::string>& lines) {
  if (path == "-") {
    for (const auto& line : lines) std::cout << line << "\n";
    return;
  }
  wxpipe::write_lines_atomic(path, lines);
}

std::vector<wxpipe::Metric> parse_metrics(const std::string& spec) {
  std::vector<wxpipe::Metric> metrics;
  std::istringstream in(spec);
  std::string name;
  while (std::getline(in, name, ','))
    if (!name.empty()) metrics.push_back(wxpipe::metric_from_name(name));
  return metrics;
}

struct CodecArgs {
  std::string script;
  std::string in = "-";
  std::string out = "-";
  std::string spans;
  bool allow_lossy = false;
};

int run_encode(const CodecArgs& args) {
  wxpipe::ScriptId script = wxpipe::script_from_name(args.script);
  if (!wxpipe::script_invertible(script) && !args.allow_lossy) {
    std::cerr << "wxpipe: " << args.script
              << " is a lossy one-way mapping; pass --allow-lossy to "
                 "acknowledge\n";
    return 1;
  }
  wxpipe::WxCodec codec(wxpipe::ScriptTable::builtin(script));
  std::vector<std::string> out, span_lines;
  std::size_t diagnostics = 0;
  for (const auto& line : slurp_lines(args.in)) {
    auto enc = codec.encode(line);
    diagnostics += enc.diagnostics.size();
    json spans = json::array();
    for (const auto& s : enc.spans)
      spans.push_back({s.begin, s.end,
                       s.kind == wxpipe::SpanKind::Passthrough ? "p" : "t"});
    span_lines.push_back(json{{"spans", spans}}.dump());
    out.push_back(std::move(enc.wx));
  }
  emit_lines(args.out, out);
  if (!args.spans.empty()) emit_lines(args.spans, span_lines);
  if (diagnostics)
    std::cerr << "wxpipe: " << diagnostics
              << " diagnostics (orphan or unmapped codepoints)\n";
  return 0;
}

int run_decode(const CodecArgs& args) {
  wxpipe::ScriptId script = wxpipe::script_from_name(args.script);
  wxpipe::WxCodec codec(wxpipe::ScriptTable::builtin(script));
  std::vector<std::string> out;
  std::size_t diagnostics = 0;
  for (const auto& line : slurp_lines(args.in)) {
    auto dec = codec.decode(line);
    diagnostics += dec.diagnostics.size();
    out.push_back(std::move(dec.text));
  }
  emit_lines(args.out, out);
  if (diagnostics)
    std::cerr << "wxpipe: " << diagnostics
              << " unmappable symbols copied through\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WX phonetic-orthographic text pipeline"};
  app.set_version_flag("--version", wxpipe::kVersion);
  app.require_subcommand(1);

  // encode / decode
  CodecArgs codec_args;
  auto* encode_cmd =
      app.add_subcommand("encode", "Transliterate text into WX");
  encode_cmd->add_option("--script", codec_args.script, "Source script")
      ->required();
  encode_cmd->add_option("--in", codec_args.in, "Input file or -");
  encode_cmd->add_option("--out", codec_args.out, "Output file or -");
  encode_cmd->add_option("--spans", codec_args.spans,
                         "Write span annotations (JSONL)");
  encode_cmd->add_flag("--allow-lossy", codec_args.allow_lossy,
                       "Accept one-way scripts (perso_arabic)");

  auto* decode_cmd =
      app.add_subcommand("decode", "Transliterate WX back to a script");
  decode_cmd->add_option("--script", codec_args.script, "Target script")
      ->required();
  decode_cmd->add_option("--in", codec_args.in, "Input file or -");
  decode_cmd->add_option("--out", codec_args.out, "Output file or -");

  // bpe learn|apply|undo
  auto* bpe_cmd = app.add_subcommand("bpe", "Subword model operations");
  bpe_cmd->require_subcommand(1);
  std::string bpe_in = "-", bpe_out = "-", bpe_model;
  std::string bpe_marker = "▁";
  wxpipe::BpeOptions bpe_opts;
  auto* bpe_learn = bpe_cmd->add_subcommand("learn", "Learn merges");
  bpe_learn->add_option("--in", bpe_in, "Training corpus or -");
  bpe_learn->add_option("--model", bpe_model, "Model file to write")
      ->required();
  bpe_learn->add_option("--merges", bpe_opts.merge_count, "Merge operations");
  bpe_learn->add_option("--vocab-cap", bpe_opts.vocab_cap,
                        "Vocabulary size cap");
  bpe_learn->add_option("--min-pair-freq", bpe_opts.min_pair_freq,
                        "Lowest pair frequency still merged");
  auto* bpe_apply = bpe_cmd->add_subcommand("apply", "Segment text");
  bpe_apply->add_option("--model", bpe_model, "Model file")->required();
  bpe_apply->add_option("--in", bpe_in, "Input file or -");
  bpe_apply->add_option("--out", bpe_out, "Output file or -");
  auto* bpe_undo = bpe_cmd->add_subcommand("undo", "Join tokens back");
  bpe_undo->add_option("--in", bpe_in, "Token file or -");
  bpe_undo->add_option("--out", bpe_out, "Output file or -");
  bpe_undo->add_option("--marker", bpe_marker, "Boundary marker");

  // lm train|score|ppl
  auto* lm_cmd = app.add_subcommand("lm", "Character n-gram model");
  lm_cmd->require_subcommand(1);
  std::string lm_in = "-", lm_model, lm_smoothing = "kneser_ney";
  wxpipe::LmOptions lm_opts;
  bool lm_no_eos = false, lm_per_sentence = false;
  auto* lm_train = lm_cmd->add_subcommand("train", "Train and save ARPA");
  lm_train->add_option("--in", lm_in, "Training corpus or -");
  lm_train->add_option("--model", lm_model, "ARPA file to write")->required();
  lm_train->add_option("--order", lm_opts.order, "N-gram order");
  lm_train->add_option("--smoothing", lm_smoothing,
                       "kneser_ney|witten_bell|mle|uniform");
  lm_train->add_option("--discount", lm_opts.discount, "Absolute discount");
  lm_train->add_flag("--no-eos", lm_no_eos, "Do not score end-of-sentence");
  auto* lm_score = lm_cmd->add_subcommand("score", "Average log10 prob");
  lm_score->add_option("--model", lm_model, "ARPA file")->required();
  lm_score->add_option("--in", lm_in, "Corpus or -");
  lm_score->add_flag("--per-sentence", lm_per_sentence,
                     "One line per sentence");
  auto* lm_ppl = lm_cmd->add_subcommand("ppl", "Perplexity");
  lm_ppl->add_option("--model", lm_model, "ARPA file")->required();
  lm_ppl->add_option("--in", lm_in, "Corpus or -");

  // analyze
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Corpus similarity and complexity");
  std::vector<std::string> corpus_specs, pair_specs,
      which = {"entropy", "redundancy", "ssnglm", "perplexity"};
  std::string analyze_out, analyze_manifest;
  int analyze_order = 6;
  analyze_cmd->add_option("--manifest", analyze_manifest,
                          "Derive corpora and surface pairs from a manifest");
  analyze_cmd->add_option("--corpus", corpus_specs, "lang=path, repeatable");
  analyze_cmd->add_option("--pair", pair_specs,
                          "label=pathA,pathB for surface metrics");
  analyze_cmd->add_option("--which", which,
                          "entropy redundancy ssnglm perplexity surface");
  analyze_cmd->add_option("--out-dir", analyze_out, "Report directory");
  analyze_cmd->add_option("--order", analyze_order, "LM order");
  std::size_t analyze_max_lines = 0;
  analyze_cmd->add_option("--max-lines", analyze_max_lines,
                          "Restrict every corpus to its first N lines");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "MT evaluation metrics");
  std::string eval_hyp, eval_ref, eval_out,
      eval_metrics = "bleu,char_bleu,chrf2,ter,wer";
  eval_cmd->add_option("--hyp", eval_hyp, "Hypothesis file")->required();
  eval_cmd->add_option("--ref", eval_ref, "Reference file")->required();
  eval_cmd->add_option("--metrics", eval_metrics, "Comma-separated list");
  eval_cmd->add_option("--out", eval_out, "JSON report file");

  // prepare / postprocess
  auto* prepare_cmd =
      app.add_subcommand("prepare", "Encode + BPE a corpus manifest");
  std::string manifest_path;
  prepare_cmd->add_option("--manifest", manifest_path, "Manifest file")
      ->required();

  auto* post_cmd = app.add_subcommand(
      "postprocess", "Undo BPE and decode hypotheses to plain text");
  std::string post_run, post_pair, post_hyp, post_out, post_spans;
  post_cmd->add_option("--run", post_run, "Run directory")->required();
  post_cmd->add_option("--pair", post_pair, "Pair label, e.g. hi-gu")
      ->required();
  post_cmd->add_option("--hyp", post_hyp, "Hypothesis token file")
      ->required();
  post_cmd->add_option("--out", post_out, "Plain-text output")->required();
  post_cmd->add_option("--spans", post_spans,
                       "Span file from prepare for passthrough restore");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; anything else is a usage error
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (encode_cmd->parsed()) return run_encode(codec_args);
    if (decode_cmd->parsed()) return run_decode(codec_args);

    if (bpe_learn->parsed()) {
      auto model = wxpipe::BpeModel::learn(slurp_lines(bpe_in), bpe_opts);
      model.save(bpe_model);
      std::cerr << "wxpipe: " << model.merges().size() << " merges, vocab "
                << model.vocab().size() << "\n";
      return 0;
    }
    if (bpe_apply->parsed()) {
      auto model = wxpipe::BpeModel::load(bpe_model);
      std::vector<std::string> out;
      for (const auto& line : slurp_lines(bpe_in)) {
        auto tokens = model.apply(line);
        std::string joined;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
          if (i) joined += ' ';
          joined += tokens[i];
        }
        out.push_back(std::move(joined));
      }
      emit_lines(bpe_out, out);
      return 0;
    }
    if (bpe_undo->parsed()) {
      std::vector<std::string> out;
      for (const auto& line : slurp_lines(bpe_in)) {
        std::istringstream in(line);
        std::vector<std::string> tokens;
        std::string t;
        while (in >> t) tokens.push_back(t);
        out.push_back(wxpipe::undo_bpe(tokens, bpe_marker));
      }
      emit_lines(bpe_out, out);
      return 0;
    }

    if (lm_train->parsed()) {
      lm_opts.smoothing = wxpipe::smoothing_from_name(lm_smoothing);
      lm_opts.include_eos = !lm_no_eos;
      auto lm = wxpipe::CharNGramLM::train(slurp_lines(lm_in), lm_opts);
      lm.save_arpa(lm_model);
      std::cerr << "wxpipe: alphabet " << lm.alphabet_size() << ", order "
                << lm.options().order << "\n";
      return 0;
    }
    if (lm_score->parsed()) {
      auto lm = wxpipe::CharNGramLM::load_arpa(lm_model);
      auto corpus = slurp_lines(lm_in);
      if (lm_per_sentence) {
        for (const auto& line : corpus) {
          auto s = lm.sentence_logprob(line);
          std::cout << s.total_log10_prob << "\t" << s.scored_tokens << "\n";
        }
      }
      std::cout << lm.corpus_score(corpus) << "\n";
      return 0;
    }
    if (lm_ppl->parsed()) {
      auto lm = wxpipe::CharNGramLM::load_arpa(lm_model);
      std::cout << lm.perplexity(slurp_lines(lm_in)) << "\n";
      return 0;
    }

    if (analyze_cmd->parsed()) {
      wxpipe::AnalyzeRequest request;
      if (!analyze_manifest.empty()) {
        request = wxpipe::analyze_request_from_manifest(
            wxpipe::Manifest::load(analyze_manifest), which);
      }
      request.which = which;
      if (analyze_cmd->count("--order") || analyze_manifest.empty())
        request.lm_order = analyze_order;
      if (!analyze_out.empty())
        request.out_dir = analyze_out;
      else if (analyze_manifest.empty())
        request.out_dir = "analysis";
      request.max_lines = analyze_max_lines;
      for (const auto& spec : corpus_specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos)
          throw wxpipe::ManifestError("--corpus expects lang=path, got '" +
                                      spec + "'");
        request.corpora.emplace_back(spec.substr(0, eq),
                                     slurp_lines(spec.substr(eq + 1)));
      }
      for (const auto& spec : pair_specs) {
        auto eq = spec.find('=');
        auto comma = spec.find(',', eq);
        if (eq == std::string::npos || comma == std::string::npos)
          throw wxpipe::ManifestError(
              "--pair expects label=pathA,pathB, got '" + spec + "'");
        request.surface_pairs.push_back(
            {spec.substr(0, eq),
             {slurp_lines(spec.substr(eq + 1, comma - eq - 1)),
              slurp_lines(spec.substr(comma + 1))}});
      }
      auto written = wxpipe::analyze(request);
      for (const auto& path : written)
        std::cout << path.generic_string() << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      std::optional<fs::path> out;
      if (!eval_out.empty()) out = eval_out;
      auto results = wxpipe::evaluate_files(eval_hyp, eval_ref,
                                            parse_metrics(eval_metrics), out);
      for (const auto& r : results) {
        json details = json::object();
        for (const auto& [k, v] : r.details) details[k] = v;
        json record = {{"metric", std::string(metric_name(r.metric))},
                       {"score", r.score},
                       {"details", details},
                       {"signature", r.signature}};
        std::cout << record.dump() << "\n";
      }
      return 0;
    }

    if (prepare_cmd->parsed()) {
      auto manifest = wxpipe::Manifest::load(manifest_path);
      auto run = wxpipe::prepare(manifest);
      std::cout << "run " << run.run_id << " -> " << run.dir.generic_string()
                << "\n";
      return 0;
    }
    if (post_cmd->parsed()) {
      std::optional<fs::path> spans;
      if (!post_spans.empty()) spans = post_spans;
      auto stats =
          wxpipe::postprocess(post_run, post_pair, post_hyp, post_out, spans);
      std::cerr << "wxpipe: " << stats.lines << " lines, " << stats.flagged
                << " kept in WX\n";
      return 0;
    }
  } catch (const wxpipe::Error& e) {
    std::cerr << "wxpipe: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "wxpipe: internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
