#include "wxpipe/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wxpipe/errors.hpp"
#include "wxpipe/version.hpp"

namespace wxpipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string span_kind_tag(SpanKind kind) {
  return kind == SpanKind::Passthrough ? "p" : "t";
}

json spans_to_json(const std::vector<Span>& spans) {
  json arr = json::array();
  for (const auto& s : spans)
    arr.push_back({s.begin, s.end, span_kind_tag(s.kind)});
  return arr;
}

std::vector<Span> spans_from_json(const json& arr) {
  std::vector<Span> spans;
  for (const auto& s : arr)
    spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(),
                     s.at(2).get<std::string>() == "p"
                         ? SpanKind::Passthrough
                         : SpanKind::Transliterated});
  return spans;
}

struct EncodedFile {
  std::vector<std::string> wx_lines;
  std::vector<std::string> span_lines;  // one JSON record per line
  std::size_t diagnostics = 0;
};

EncodedFile encode_file(const std::vector<std::string>& lines,
                        ScriptId script) {
  EncodedFile out;
  WxCodec codec(ScriptTable::builtin(script));
  for (const auto& line : lines) {
    auto enc = codec.encode(line);
    out.diagnostics += enc.diagnostics.size();
    out.wx_lines.push_back(std::move(enc.wx));
    out.span_lines.push_back(json{{"spans", spans_to_json(enc.spans)}}.dump());
  }
  return out;
}

std::string decode_with_spans(const WxCodec& codec, const std::string& wx,
                              const std::vector<Span>& spans,
                              std::size_t& flags) {
  std::string out;
  bool flagged = false;
  for (const auto& span : spans) {
    if (span.end > wx.size() || span.begin > span.end) {
      flagged = true;
      break;
    }
    std::string_view piece(wx.data() + span.begin, span.end - span.begin);
    if (span.kind == SpanKind::Passthrough) {
      out += piece;
    } else {
      auto dec = codec.decode(piece);
      if (!dec.diagnostics.empty()) flagged = true;
      out += dec.text;
    }
  }
  if (flagged) ++flags;
  return flagged ? wx : out;
}

}  // namespace

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (!path.parent_path().empty())
    fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write file: " + tmp.string());
    out << content;
    if (!out) throw FormatError("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_lines_atomic(const fs::path& path,
                        const std::vector<std::string>& lines) {
  std::string content;
  for (const auto& line : lines) {
    content += line;
    content += '\n';
  }
  write_file_atomic(path, content);
}

Manifest Manifest::parse(std::string_view text, const fs::path& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  PairSpec* open_pair = nullptr;

  auto fail = [&](const std::string& what) {
    throw ManifestError("manifest line " + std::to_string(lineno) + ": " +
                        what);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;

    auto rest = [&](int n) {
      std::vector<std::string> out(n);
      for (auto& f : out)
        if (!(fields >> f)) fail("record '" + key + "' needs " +
                                 std::to_string(n) + " fields");
      return out;
    };

    try {
      if (key == "pair") {
        auto f = rest(2);
        m.pairs.push_back({});
        open_pair = &m.pairs.back();
        open_pair->source_lang = f[0];
        open_pair->target_lang = f[1];
      } else if (key == "end") {
        if (!open_pair) fail("'end' outside a pair block");
        open_pair = nullptr;
      } else if (open_pair) {
        if (key == "source_script")
          open_pair->source_script = script_from_name(rest(1)[0]);
        else if (key == "target_script")
          open_pair->target_script = script_from_name(rest(1)[0]);
        else if (key == "train" || key == "valid" || key == "test") {
          auto f = rest(2);
          open_pair->splits[key] = {f[0], f[1]};
        } else
          fail("unknown pair record '" + key + "'");
      } else if (key == "output_dir") {
        m.output_dir = rest(1)[0];
      } else if (key == "bpe_merges") {
        m.bpe.merge_count = std::stoull(rest(1)[0]);
      } else if (key == "bpe_vocab_cap") {
        m.bpe.vocab_cap = std::stoull(rest(1)[0]);
      } else if (key == "bpe_min_pair_freq") {
        m.bpe.min_pair_freq = std::stoull(rest(1)[0]);
      } else if (key == "lm_order") {
        m.lm_order = std::stoi(rest(1)[0]);
      } else if (key == "joint_bpe") {
        m.joint_bpe = rest(1)[0] == "yes";
      } else if (key == "allow_lossy") {
        m.allow_lossy = rest(1)[0] == "yes";
      } else {
        fail("unknown record '" + key + "'");
      }
    } catch (const FormatError& e) {
      fail(e.what());
    } catch (const std::logic_error&) {
      fail("bad numeric value in '" + key + "'");
    }
  }
  if (open_pair) throw ManifestError("manifest ends inside a pair block");
  if (m.output_dir.empty()) throw ManifestError("manifest sets no output_dir");
  if (m.pairs.empty()) throw ManifestError("manifest declares no pairs");
  for (const auto& pair : m.pairs) {
    if (pair.splits.empty())
      throw ManifestError("pair " + pair.label() + " has no splits");
  }
  return m;
}

Manifest Manifest::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open manifest: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

fs::path Manifest::resolve(const std::string& path) const {
  fs::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

std::string Manifest::settings_hash() const {
  std::ostringstream canon;
  canon << "output_dir=" << output_dir.generic_string()
        << ";bpe=" << bpe.merge_count << "," << bpe.vocab_cap << ","
        << bpe.min_pair_freq << "," << bpe.boundary_marker
        << ";lm_order=" << lm_order << ";joint=" << joint_bpe
        << ";lossy=" << allow_lossy;
  for (const auto& pair : pairs) {
    canon << ";pair=" << pair.label() << ","
          << script_name(pair.source_script) << ","
          << script_name(pair.target_script);
    for (const auto& [split, files] : pair.splits)
      canon << "," << split << ":" << files.first << "|" << files.second;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canon.str())));
  return buf;
}

PipelineRun prepare(const Manifest& manifest) {
  PipelineRun run;
  run.run_id = manifest.settings_hash();
  run.dir = manifest.output_dir.is_absolute()
                ? manifest.output_dir
                : manifest.base_dir / manifest.output_dir;

  json record;
  record["run_id"] = run.run_id;
  record["tool_version"] = kVersion;
  record["settings_hash"] = run.run_id;
  record["created"] = iso_timestamp();
  record["pairs"] = json::array();
  json outputs = json::array();

  auto emit = [&](const fs::path& path,
                  const std::vector<std::string>& lines) {
    write_lines_atomic(path, lines);
    outputs.push_back(fs::relative(path, run.dir).generic_string());
  };

  for (const auto& pair : manifest.pairs) {
    for (ScriptId script : {pair.source_script, pair.target_script}) {
      if (!script_invertible(script) && !manifest.allow_lossy)
        throw ManifestError(
            "pair " + pair.label() + " uses the lossy script '" +
            std::string(script_name(script)) +
            "'; set 'allow_lossy yes' to acknowledge one-way encoding");
    }

    fs::path pair_dir = run.dir / pair.label();
    json pair_record;
    pair_record["pair"] = pair.label();
    pair_record["source_lang"] = pair.source_lang;
    pair_record["target_lang"] = pair.target_lang;
    pair_record["source_script"] = script_name(pair.source_script);
    pair_record["target_script"] = script_name(pair.target_script);
    std::size_t diagnostics = 0;

    // Encode every split of both sides.
    std::map<std::string, std::map<std::string, EncodedFile>> encoded;
    for (const auto& [split, files] : pair.splits) {
      fs::path src_path = manifest.resolve(files.first);
      fs::path tgt_path = manifest.resolve(files.second);
      auto src_lines = read_lines(src_path);
      auto tgt_lines = read_lines(tgt_path);
      if (src_lines.size() != tgt_lines.size())
        throw AlignmentMismatch(
            "pair " + pair.label() + " split " + split + ": " +
            src_path.string() + " has " + std::to_string(src_lines.size()) +
            " lines, " + tgt_path.string() + " has " +
            std::to_string(tgt_lines.size()));
      encoded[split][pair.source_lang] =
          encode_file(src_lines, pair.source_script);
      encoded[split][pair.target_lang] =
          encode_file(tgt_lines, pair.target_script);
    }

    // Learn BPE on the training split, falling back to the first available
    // split for zero-shot pairs.
    const std::string bpe_split =
        encoded.count("train") ? "train" : encoded.begin()->first;
    std::map<std::string, BpeModel> models;
    if (manifest.joint_bpe) {
      std::vector<std::string> joint;
      for (const auto& [lang, file] : encoded.at(bpe_split))
        joint.insert(joint.end(), file.wx_lines.begin(),
                     file.wx_lines.end());
      BpeModel model = BpeModel::learn(joint, manifest.bpe);
      write_file_atomic(pair_dir / "bpe.joint.model", model.to_text());
      outputs.push_back(
          fs::relative(pair_dir / "bpe.joint.model", run.dir)
              .generic_string());
      models[pair.source_lang] = model;
      models[pair.target_lang] = std::move(model);
    } else {
      for (const auto& lang : {pair.source_lang, pair.target_lang}) {
        BpeModel model =
            BpeModel::learn(encoded.at(bpe_split).at(lang).wx_lines,
                            manifest.bpe);
        fs::path model_path = pair_dir / ("bpe." + lang + ".model");
        write_file_atomic(model_path, model.to_text());
        outputs.push_back(fs::relative(model_path, run.dir).generic_string());
        models[lang] = std::move(model);
      }
    }
    pair_record["bpe_split"] = bpe_split;
    pair_record["bpe_mode"] = manifest.joint_bpe ? "joint" : "separate";

    // Emit WX text, span annotations and BPE token files per split.
    for (const auto& [split, sides] : encoded) {
      for (const auto& [lang, file] : sides) {
        diagnostics += file.diagnostics;
        emit(pair_dir / (split + "." + lang + ".wx"), file.wx_lines);
        emit(pair_dir / (split + "." + lang + ".spans.jsonl"),
             file.span_lines);
        std::vector<std::string> token_lines;
        token_lines.reserve(file.wx_lines.size());
        const BpeModel& model = models.at(lang);
        BpeModel::WordCache cache;
        for (const auto& wx : file.wx_lines) {
          auto tokens = model.apply(wx, cache);
          std::string joined;
          for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) joined += ' ';
            joined += tokens[i];
          }
          token_lines.push_back(std::move(joined));
        }
        emit(pair_dir / (split + "." + lang + ".bpe"), token_lines);
      }
    }
    pair_record["diagnostics"] = diagnostics;
    record["pairs"].push_back(pair_record);
  }

  record["outputs"] = outputs;
  record["manifest"] = {
      {"bpe_merges", manifest.bpe.merge_count},
      {"bpe_vocab_cap", manifest.bpe.vocab_cap},
      {"lm_order", manifest.lm_order},
      {"joint_bpe", manifest.joint_bpe},
      {"allow_lossy", manifest.allow_lossy},
  };
  run.record_json = record.dump(2);
  write_file_atomic(run.dir / "run.json", run.record_json + "\n");
  return run;
}

PipelineRun PipelineRun::load(const fs::path& dir) {
  PipelineRun run;
  run.dir = dir;
  auto lines = read_lines(dir / "run.json");
  std::string text;
  for (const auto& line : lines) text += line + "\n";
  run.record_json = text;
  try {
    run.run_id = json::parse(text).at("run_id").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError("bad run record in " + dir.string() + ": " + e.what());
  }
  return run;
}

PostprocessStats postprocess(const fs::path& run_dir,
                             const std::string& pair_label,
                             const fs::path& hyp_file, const fs::path& out_file,
                             const std::optional<fs::path>& span_file) {
  PipelineRun run = PipelineRun::load(run_dir);
  json record = json::parse(run.record_json);

  std::string target_script_name, target_lang, bpe_mode;
  bool found = false;
  for (const auto& pair : record.at("pairs")) {
    if (pair.at("pair").get<std::string>() != pair_label) continue;
    target_script_name = pair.at("target_script").get<std::string>();
    target_lang = pair.at("target_lang").get<std::string>();
    bpe_mode = pair.at("bpe_mode").get<std::string>();
    found = true;
    break;
  }
  if (!found)
    throw ManifestError("run has no pair '" + pair_label + "'");

  ScriptId script = script_from_name(target_script_name);
  WxCodec codec(ScriptTable::builtin(script));  // throws later if lossy

  fs::path model_path =
      run.dir / pair_label /
      (bpe_mode == "joint" ? "bpe.joint.model" : "bpe." + target_lang +
                                                     ".model");
  BpeModel model = BpeModel::load(model_path.string());

  auto hyp_lines = read_lines(hyp_file);
  std::vector<std::vector<Span>> spans;
  if (span_file) {
    for (const auto& line : read_lines(*span_file)) {
      try {
        spans.push_back(spans_from_json(json::parse(line).at("spans")));
      } catch (const json::exception& e) {
        throw FormatError("bad span record: " + std::string(e.what()));
      }
    }
    if (spans.size() != hyp_lines.size())
      throw AlignmentMismatch(
          "span file has " + std::to_string(spans.size()) +
          " records for " + std::to_string(hyp_lines.size()) + " lines");
  }

  PostprocessStats stats;
  std::vector<std::string> out_lines;
  out_lines.reserve(hyp_lines.size());
  for (std::size_t i = 0; i < hyp_lines.size(); ++i) {
    ++stats.lines;
    std::istringstream in(hyp_lines[i]);
    std::vector<std::string> tokens;
    std::string t;
    while (in >> t) tokens.push_back(t);
    std::string wx = model.undo(tokens);
    if (span_file) {
      out_lines.push_back(
          decode_with_spans(codec, wx, spans[i], stats.flagged));
    } else {
      auto dec = codec.decode(wx);
      if (dec.diagnostics.empty()) {
        out_lines.push_back(std::move(dec.text));
      } else {
        // keep the WX form rather than emit a mangled line
        ++stats.flagged;
        out_lines.push_back(std::move(wx));
      }
    }
  }
  write_lines_atomic(out_file, out_lines);
  return stats;
}

std::vector<fs::path> analyze(const AnalyzeRequest& request_in) {
  AnalyzeRequest request = request_in;
  if (request.max_lines) {
    for (auto& [lang, lines] : request.corpora)
      if (lines.size() > request.max_lines) lines.resize(request.max_lines);
    for (auto& [label, sides] : request.surface_pairs) {
      if (sides.first.size() > request.max_lines)
        sides.first.resize(request.max_lines);
      if (sides.second.size() > request.max_lines)
        sides.second.resize(request.max_lines);
    }
  }

  for (const auto& w : request.which) {
    if (w != "entropy" && w != "redundancy" && w != "ssnglm" &&
        w != "perplexity" && w != "surface")
      throw ManifestError("unknown analysis '" + w + "'");
  }

  std::vector<fs::path> written;
  auto wants = [&](std::string_view what) {
    for (const auto& w : request.which)
      if (w == what) return true;
    return false;
  };
  auto emit = [&](const fs::path& name, const std::string& content) {
    fs::path path = request.out_dir / name;
    write_file_atomic(path, content);
    written.push_back(path);
  };

  if ((wants("entropy") || wants("redundancy")) && !request.corpora.empty()) {
    json records = json::array();
    std::ostringstream tsv;
    tsv << "language\tchar_entropy\tchar_entropy_wx\tdifference\t"
           "redundancy\tword_max\tword_median\tword_average\talphabet\n";
    for (const auto& [lang, lines] : request.corpora) {
      auto report = entropy_report(lines);
      // encode into WX when the text is in a known script, for the
      // raw-vs-WX entropy comparison
      double wx_entropy = std::numeric_limits<double>::quiet_NaN();
      try {
        auto guess = detect_script(
            [&] {
              std::string all;
              for (const auto& l : lines) {
                all += l;
                all += '\n';
              }
              return all;
            }());
        WxCodec codec(ScriptTable::builtin(guess.script));
        std::vector<std::string> wx;
        wx.reserve(lines.size());
        for (const auto& l : lines) wx.push_back(codec.encode(l).wx);
        wx_entropy = char_entropy(wx);
      } catch (const NoIndicContent&) {
      }
      json rec = {
          {"language", lang},
          {"corpus_char_entropy", report.corpus_char_entropy},
          {"word_entropy",
           {{"max", report.word_entropy.max},
            {"median", report.word_entropy.median},
            {"average", report.word_entropy.average}}},
          {"redundancy", report.redundancy},
          {"alphabet_size", report.alphabet_size},
      };
      if (!std::isnan(wx_entropy)) {
        rec["char_entropy_wx"] = wx_entropy;
        rec["difference"] = report.corpus_char_entropy - wx_entropy;
      }
      records.push_back(rec);
      char num[256];
      std::snprintf(num, sizeof(num),
                    "%s\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%zu\n",
                    lang.c_str(), report.corpus_char_entropy, wx_entropy,
                    report.corpus_char_entropy - wx_entropy,
                    report.redundancy, report.word_entropy.max,
                    report.word_entropy.median, report.word_entropy.average,
                    report.alphabet_size);
      tsv << num;
    }
    emit("entropy.json", records.dump(2) + "\n");
    emit("entropy.tsv", tsv.str());
  }

  MatrixOptions opts;
  opts.lm.order = request.lm_order;
  if (wants("ssnglm") && request.corpora.size() >= 2) {
    auto m = ssnglm_matrix(request.corpora, opts);
    emit("ssnglm.tsv", m.to_tsv());
    emit("ssnglm.json", m.to_json() + "\n");
  }
  if (wants("perplexity") && request.corpora.size() >= 2) {
    auto raw = perplexity_matrix(request.corpora, false, opts);
    emit("perplexity.tsv", raw.to_tsv());
    emit("perplexity.json", raw.to_json() + "\n");
    auto sym = perplexity_matrix(request.corpora, true, opts);
    emit("perplexity_symmetric.tsv", sym.to_tsv());
    emit("perplexity_symmetric.json", sym.to_json() + "\n");
  }
  if (wants("surface") && !request.surface_pairs.empty()) {
    json records = json::array();
    for (const auto& [label, sides] : request.surface_pairs) {
      auto results = pairwise_surface_similarity(
          sides.first, sides.second,
          {Metric::CharBleu, Metric::Chrf2, Metric::Ter});
      for (const auto& r : results) {
        records.push_back({{"pair", label},
                           {"metric", std::string(metric_name(r.metric))},
                           {"score", r.score},
                           {"signature", r.signature}});
      }
    }
    emit("surface.json", records.dump(2) + "\n");
  }
  return written;
}

AnalyzeRequest analyze_request_from_manifest(
    const Manifest& manifest, const std::vector<std::string>& which) {
  AnalyzeRequest request;
  request.which = which;
  request.lm_order = manifest.lm_order;
  request.out_dir = (manifest.output_dir.is_absolute()
                         ? manifest.output_dir
                         : manifest.base_dir / manifest.output_dir) /
                    "analysis";

  std::set<std::string> seen;
  for (const auto& pair : manifest.pairs) {
    const auto& split = pair.splits.count("train")
                            ? *pair.splits.find("train")
                            : *pair.splits.begin();
    auto src_lines = read_lines(manifest.resolve(split.second.first));
    auto tgt_lines = read_lines(manifest.resolve(split.second.second));
    if (seen.insert(pair.source_lang).second)
      request.corpora.emplace_back(pair.source_lang, src_lines);
    if (seen.insert(pair.target_lang).second)
      request.corpora.emplace_back(pair.target_lang, tgt_lines);

    WxCodec src_codec(ScriptTable::builtin(pair.source_script));
    WxCodec tgt_codec(ScriptTable::builtin(pair.target_script));
    std::vector<std::string> src_wx, tgt_wx;
    src_wx.reserve(src_lines.size());
    tgt_wx.reserve(tgt_lines.size());
    for (const auto& line : src_lines)
      src_wx.push_back(src_codec.encode(line).wx);
    for (const auto& line : tgt_lines)
      tgt_wx.push_back(tgt_codec.encode(line).wx);
    request.surface_pairs.push_back(
        {pair.label(), {std::move(src_wx), std::move(tgt_wx)}});
  }
  return request;
}

std::vector<EvalResult> evaluate_files(
    const fs::path& hyp_file, const fs::path& ref_file,
    const std::vector<Metric>& metrics,
    const std::optional<fs::path>& out_file) {
  auto hyp = read_lines(hyp_file);
  auto ref = read_lines(ref_file);
  std::vector<EvalResult> results;
  for (Metric metric : metrics) {
    switch (metric) {
      case Metric::Bleu: results.push_back(bleu(hyp, ref)); break;
      case Metric::CharBleu: results.push_back(char_bleu(hyp, ref)); break;
      case Metric::Chrf2: results.push_back(chrf2(hyp, ref)); break;
      case Metric::Ter: results.push_back(ter(hyp, ref)); break;
      case Metric::Wer: results.push_back(wer(hyp, ref)); break;
    }
  }
  if (out_file) {
    json records = json::array();
    for (const auto& r : results) {
      json details = json::object();
      for (const auto& [k, v] : r.details) details[k] = v;
      records.push_back({{"metric", std::string(metric_name(r.metric))},
                         {"score", r.score},
                         {"details", details},
                         {"signature", r.signature}});
    }
    write_file_atomic(*out_file, records.dump(2) + "\n");
  }
  return results;
}

}  // namespace wxpipe
