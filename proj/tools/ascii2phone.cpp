// ascii2phone: command-line front end for the library.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 bad input data,
// 3 internal error.

#include <cctype>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "a2p/g2p.hpp"
#include "a2p/graphemes.hpp"
#include "a2p/metrics.hpp"
#include "a2p/neural.hpp"
#include "a2p/pipeline.hpp"
#include "a2p/scriptcore.hpp"
#include "a2p/util.hpp"

using namespace a2p;
namespace fs = std::filesystem;

namespace {

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  if (!fs::exists(path)) throw ConfigError("input not found: " + path);
  return read_file(path);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::vector<std::string> lines_of(const std::string& text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.pop_back();
  return lines;
}

std::uint64_t seeded(std::uint64_t seed) { return pipeline::seed_override().value_or(seed); }

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Phone durations from per-phone rows: either `utt phone s1..s5 ...` (the
// alignment and pipeline prediction files) or bare numbers as written by
// `dnn predict`. The phone duration is the sum of the five sub-states.
std::vector<double> phone_durations_from_states(const std::string& text) {
  auto number = [](const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::logic_error&) {
      throw DataError("duration file: bad number '" + s + "'");
    }
  };
  std::vector<double> out;
  for (const auto& line : lines_of(text)) {
    if (trim(line).empty() || line.front() == '#') continue;
    auto cols = split_whitespace(line);
    std::size_t first = 2;
    if (!cols.empty() && (std::isdigit(static_cast<unsigned char>(cols[0][0])) || cols[0][0] == '-')) first = 0;
    if (cols.size() < first + neural::kStates) throw DataError("duration file: too few columns: '" + line + "'");
    double sum = 0;
    for (std::size_t s = 0; s < neural::kStates; ++s) sum += number(cols[first + s]);
    out.push_back(sum);
  }
  return out;
}

std::vector<std::size_t> rounded(const std::vector<double>& v) {
  std::vector<std::size_t> out;
  for (double d : v) out.push_back(static_cast<std::size_t>(std::llround(std::max(0.0, d))));
  return out;
}

neural::AcousticLayout parse_layout(const std::string& spec) {
  neural::AcousticLayout layout;
  for (const auto& part : split(spec, ',')) {
    auto kv = split(part, '=');
    if (kv.size() == 1 && kv[0] == "deltas") {
      layout.deltas = true;
    } else if (kv.size() == 1 && kv[0] == "nodeltas") {
      layout.deltas = false;
    } else if (kv.size() == 2 && kv[0] == "mcc") {
      layout.mcc = std::stoul(kv[1]);
    } else if (kv.size() == 2 && kv[0] == "bap") {
      layout.bap = std::stoul(kv[1]);
    } else {
      throw ConfigError("bad layout element '" + part + "' (mcc=N,bap=N,deltas|nodeltas)");
    }
  }
  return layout;
}

int run(int argc, char** argv) {
  CLI::App app{"ASCII transliteration to phones, G2P, duration modelling and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pipeline::kToolVersion));

  // to-cps ------------------------------------------------------------------
  auto* to_cps = app.add_subcommand("to-cps", "Convert native-script lines to CPS phones");
  std::string language = "hindi", mapping, schwa = "retain", input, output;
  bool phones_out = false;
  to_cps->add_option("--language", language, "hindi, tamil or telugu")->capture_default_str();
  to_cps->add_option("--mapping", mapping, "Mapping table file (default: the shipped table)");
  to_cps->add_option("--schwa", schwa, "retain or word_final_delete")->capture_default_str();
  to_cps->add_flag("--phones", phones_out, "Print space-separated phones with | between words");
  to_cps->add_option("input", input, "Input file, - for stdin");
  to_cps->add_option("-o,--output", output, "Output file (default stdout)");
  to_cps->callback([&] {
    const auto lang = scriptcore::parse_language(language);
    const auto policy = scriptcore::parse_schwa_policy(schwa);
    const auto table = mapping.empty() ? scriptcore::ScriptMappingTable::builtin(lang, policy)
                                       : scriptcore::ScriptMappingTable::load(lang, mapping, policy);
    std::string out;
    scriptcore::ConversionStats total;
    for (const auto& line : lines_of(read_input(input))) {
      scriptcore::ConversionStats stats;
      auto seq = scriptcore::to_cps(line, table, &stats);
      total.dropped_punctuation += stats.dropped_punctuation;
      total.dropped_digits += stats.dropped_digits;
      out += (phones_out ? seq.render() : seq.joined_words()) + '\n';
    }
    write_output(output, out);
    std::cerr << "dropped " << total.dropped_punctuation << " punctuation and " << total.dropped_digits
              << " digit characters\n";
  });

  // segment -----------------------------------------------------------------
  auto* segment = app.add_subcommand("segment", "Normalize ASCII lines and segment them into graphemes");
  std::string scheme = "uni", inventory;
  segment->add_option("--scheme", scheme, "uni or multi")->capture_default_str();
  segment->add_option("--inventory", inventory, "Multi inventory file (default: the shipped one)");
  segment->add_option("input", input, "Input file, - for stdin");
  segment->add_option("-o,--output", output, "Output file (default stdout)");
  segment->callback([&] {
    std::optional<PhoneInventory> inv;
    if (scheme == "multi") {
      inv = inventory.empty() ? graphemes::default_multi_inventory() : PhoneInventory::load(inventory);
      graphemes::check_inventory(*inv);
    } else if (scheme != "uni") {
      throw ConfigError("segment: scheme must be uni or multi");
    }
    std::string out;
    for (const auto& line : lines_of(read_input(input))) {
      const auto norm = graphemes::normalize_ascii(line);
      out += (inv ? graphemes::segment_multi(norm, *inv) : graphemes::segment_uni(norm)).render() + '\n';
    }
    write_output(output, out);
  });

  // mine-bigrams ------------------------------------------------------------
  auto* mine = app.add_subcommand("mine-bigrams", "Rank letter bigrams of an ASCII corpus");
  std::size_t top_k = 50, select = 17;
  std::string inventory_out;
  mine->add_option("input", input, "Input file, - for stdin");
  mine->add_option("--top", top_k, "Bigrams to report")->capture_default_str();
  mine->add_option("--select", select, "Bigrams in the derived multi inventory")->capture_default_str();
  mine->add_option("--inventory-out", inventory_out, "Write the derived multi inventory here");
  mine->add_option("-o,--output", output, "Report file (default stdout)");
  mine->callback([&] {
    std::vector<std::string> corpus;
    for (const auto& line : lines_of(read_input(input))) corpus.push_back(graphemes::normalize_ascii(line));
    const auto report = graphemes::mine_bigrams(corpus, std::max(top_k, select));
    auto shown = report;
    if (shown.ranked.size() > top_k) shown.ranked.resize(top_k);
    write_output(output, shown.to_tsv());
    if (!inventory_out.empty()) write_file(inventory_out, graphemes::select_multi_inventory(report, select).serialize());
  });

  // g2p ---------------------------------------------------------------------
  auto* g2p_cmd = app.add_subcommand("g2p", "Joint-sequence grapheme-to-phoneme models");
  g2p_cmd->require_subcommand(1);
  std::string lexicon_path, model_path;
  int order = 6;
  g2p::AlignConfig align;
  g2p::DecodeOptions decode;

  auto* g2p_train = g2p_cmd->add_subcommand("train", "Align a lexicon and train an n-gram graphone model");
  g2p_train->add_option("--lexicon", lexicon_path, "Lexicon TSV")->required();
  g2p_train->add_option("--order", order, "n-gram order, 1-6")->capture_default_str()->check(CLI::Range(1, 6));
  g2p_train->add_option("--gmax", align.gmax, "Letters per graphone")->capture_default_str();
  g2p_train->add_option("--pmax", align.pmax, "Phones per graphone")->capture_default_str();
  g2p_train->add_option("--em-iters", align.em_iters, "EM iterations")->capture_default_str();
  g2p_train->add_option("--language", language, "Recorded in the model")->capture_default_str();
  g2p_train->add_option("-o,--output", model_path, "Model file")->required();
  g2p_train->callback([&] {
    const auto lexicon = g2p::PronunciationLexicon::load(lexicon_path);
    const auto aligned = g2p::align_lexicon(lexicon, align);
    auto model = g2p::G2PModel::train(aligned.sequences, order, {},
                                      {language, lexicon.checksum(), align.gmax, align.pmax});
    model.save(model_path);
    std::cerr << "trained order-" << order << " model on " << lexicon.size() << " entries, "
              << model.vocabulary().size() << " graphones\n";
  });

  auto* g2p_apply = g2p_cmd->add_subcommand("apply", "Transcribe words, one per line");
  g2p_apply->add_option("--model", model_path, "Model file")->required();
  g2p_apply->add_option("--beam", decode.beam, "Beam width")->capture_default_str();
  g2p_apply->add_option("input", input, "Word list, - for stdin");
  g2p_apply->add_option("-o,--output", output, "Output file (default stdout)");
  g2p_apply->callback([&] {
    const auto model = g2p::G2PModel::load(model_path);
    std::string out;
    for (const auto& line : lines_of(read_input(input))) {
      for (const auto& word : split_whitespace(graphemes::normalize_ascii(line))) {
        const auto t = g2p::transcribe(model, word, decode);
        std::string phones;
        for (const auto& p : t.phones) phones += (phones.empty() ? "" : " ") + p;
        out += word + '\t' + phones + '\n';
      }
    }
    write_output(output, out);
  });

  auto* g2p_sweep = g2p_cmd->add_subcommand("sweep", "Phone error rate per n-gram order on a split lexicon");
  g2p::SweepConfig sweep;
  std::string orders = "1,2,3,4,5,6";
  g2p_sweep->add_option("--lexicon", lexicon_path, "Lexicon TSV")->required();
  g2p_sweep->add_option("--orders", orders, "Comma-separated orders")->capture_default_str();
  g2p_sweep->add_option("--seed", sweep.seed, "Split seed")->capture_default_str();
  g2p_sweep->add_option("--train", sweep.split.train, "Train fraction")->capture_default_str();
  g2p_sweep->add_option("--dev", sweep.split.dev, "Dev fraction")->capture_default_str();
  g2p_sweep->add_option("--test", sweep.split.test, "Test fraction")->capture_default_str();
  g2p_sweep->add_option("-o,--output", output, "Report file (default stdout)");
  g2p_sweep->callback([&] {
    sweep.orders.clear();
    for (const auto& o : split(orders, ',')) {
      try {
        sweep.orders.push_back(std::stoi(o));
      } catch (const std::logic_error&) {
        throw ConfigError("bad order '" + o + "'");
      }
    }
    sweep.seed = seeded(sweep.seed);
    write_output(output, g2p::per_sweep(g2p::PronunciationLexicon::load(lexicon_path), sweep).to_tsv());
  });

  // dnn ---------------------------------------------------------------------
  auto* dnn = app.add_subcommand("dnn", "Feed-forward duration and acoustic models");
  dnn->require_subcommand(1);
  std::string config_path, train_path, dev_path, features_path;
  auto train_model = [&](neural::TrainConfig base, bool durations) {
    if (!config_path.empty()) {
      const auto kv = pipeline::KeyValueConfig::load(config_path);
      std::vector<std::string> allowed;
      for (const auto& k : pipeline::train_config_keys()) {
        allowed.push_back(k);
        allowed.push_back("train." + k);
      }
      kv.require_known(allowed);
      base = pipeline::train_config_from(kv, "", base);
      base = pipeline::train_config_from(kv, "train", base);
    } else if (auto s = pipeline::seed_override()) {
      base.seed = *s;
    }
    const auto train = neural::Dataset::load(train_path);
    const auto dev = neural::Dataset::load(dev_path);
    train.check();
    dev.check();
    if (durations && train.y.cols() != static_cast<Eigen::Index>(neural::DurationTarget::kSize)) {
      throw DimensionMismatch(neural::DurationTarget::kSize, static_cast<std::size_t>(train.y.cols()));
    }
    auto result = neural::fit(train.x, train.y, dev.x, dev.y, base);
    result.net.save(model_path);
    for (const auto& e : result.log) {
      std::cerr << "epoch " << e.epoch << "\tlr " << e.learning_rate << "\ttrain " << e.train_loss << "\tdev "
                << e.dev_loss << '\n';
    }
    std::cerr << "kept epoch " << result.best_epoch << '\n';
  };
  for (auto [name, durations] : {std::pair{"train-duration", true}, std::pair{"train-acoustic", false}}) {
    const bool is_duration = durations;
    auto* cmd = dnn->add_subcommand(name, is_duration ? "Train an 8-output duration model" : "Train an acoustic model");
    cmd->add_option("--config", config_path, "Key-value training config (keys: hidden_layers, width, ...)");
    cmd->add_option("train", train_path, "Training dataset")->required();
    cmd->add_option("dev", dev_path, "Development dataset")->required();
    cmd->add_option("model", model_path, "Output model")->required();
    cmd->callback([&, is_duration] {
      train_model(is_duration ? neural::TrainConfig::duration() : neural::TrainConfig::acoustic(), is_duration);
    });
  }
  auto* predict = dnn->add_subcommand("predict", "Run a model over a dataset's inputs");
  predict->add_option("model", model_path, "Model file")->required();
  predict->add_option("features", features_path, "Dataset file")->required();
  predict->add_option("out", output, "Output rows, one per sample")->required();
  predict->callback([&] {
    const auto net = neural::FeedForwardNet::load(model_path);
    const auto data = neural::Dataset::load(features_path);
    std::string out;
    if (net.shape().outputs == neural::DurationTarget::kSize) {
      out = "#";
      for (auto n : neural::kDurationNames) out += " " + std::string(n);
      out += " floored\n";
      for (const auto& p : neural::predict_durations(net, data.x)) {
        for (std::size_t k = 0; k < p.values.size(); ++k) out += (k ? " " : "") + fmt(p.values[k]);
        out += p.any_floored ? " 1\n" : " 0\n";
      }
    } else {
      const auto y = net.predict(data.x);
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        for (Eigen::Index c = 0; c < y.cols(); ++c) out += (c ? " " : "") + fmt(y(r, c));
        out += '\n';
      }
    }
    write_output(output, out);
  });

  // eval --------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Objective and subjective evaluation");
  eval->require_subcommand(1);
  std::string ref_path, pred_path, layout_spec = "mcc=25,bap=5,deltas", align_mode = "truncate";
  std::string ref_durations, pred_durations, method = "system";
  std::size_t dim_first = 1, dim_last = 24;
  double frame_ms = 5.0;

  auto* objective = eval->add_subcommand("objective", "MCD, BAP distortion, F0 RMSE and V/UV error");
  objective->add_option("--ref", ref_path, "Reference frames (one frame per line)")->required();
  objective->add_option("--pred", pred_path, "Predicted frames")->required();
  objective->add_option("--layout", layout_spec, "mcc=N,bap=N,deltas|nodeltas")->capture_default_str();
  objective->add_option("--mcd-first", dim_first, "First MCC dimension")->capture_default_str();
  objective->add_option("--mcd-last", dim_last, "Last MCC dimension")->capture_default_str();
  objective->add_option("--align", align_mode, "truncate or warp")->capture_default_str();
  objective->add_option("--ref-durations", ref_durations, "warp: reference per-phone durations TSV");
  objective->add_option("--pred-durations", pred_durations, "warp: predicted per-phone durations TSV");
  objective->add_option("--frame-ms", frame_ms, "Frame period")->capture_default_str();
  objective->add_option("--language", language, "Report label")->capture_default_str();
  objective->add_option("--method", method, "Report label")->capture_default_str();
  objective->add_option("-o,--output", output, "Report file (default stdout)");
  objective->callback([&] {
    const auto layout = parse_layout(layout_spec);
    const auto ref = metrics::load_frames(ref_path), pred = metrics::load_frames(pred_path);
    metrics::FramePair pair;
    if (align_mode == "truncate") {
      pair = metrics::align_frames(ref, pred, layout, metrics::Alignment::truncate);
    } else if (align_mode == "warp") {
      if (ref_durations.empty() || pred_durations.empty()) {
        throw ConfigError("warp alignment needs --ref-durations and --pred-durations");
      }
      pair = metrics::align_frames(ref, pred, layout, metrics::Alignment::warp,
                                   rounded(phone_durations_from_states(read_input(ref_durations))),
                                   rounded(phone_durations_from_states(read_input(pred_durations))));
    } else {
      throw ConfigError("--align must be truncate or warp");
    }
    pair.frame_ms = frame_ms;
    metrics::ObjectiveRow row{language, method, metrics::mcd(pair, {dim_first, dim_last}), metrics::bap_distortion(pair),
                              metrics::f0_rmse(pair), metrics::vuv_error(pair)};
    write_output(output, "# frames\t" + std::to_string(pair.ref.rows()) + "\n" + metrics::objective_report({row}));
  });

  auto* durations_cmd = eval->add_subcommand("durations", "Duration RMSE (frames per phone) and Pearson r");
  durations_cmd->add_option("--ref", ref_path, "Reference durations TSV")->required();
  durations_cmd->add_option("--pred", pred_path, "Predicted durations TSV")->required();
  durations_cmd->add_option("--language", language, "Report label")->capture_default_str();
  durations_cmd->add_option("--method", method, "Report label")->capture_default_str();
  durations_cmd->add_option("-o,--output", output, "Report file (default stdout)");
  durations_cmd->callback([&] {
    std::vector<double> ref;
    for (const auto& r : neural::parse_duration_records(read_input(ref_path))) ref.push_back(r.target.phone());
    const auto pred = phone_durations_from_states(read_input(pred_path));
    metrics::DurationRow row{language, method, metrics::duration_rmse(ref, pred), metrics::duration_corr(ref, pred)};
    write_output(output, metrics::duration_report({row}));
  });

  auto* mushra = eval->add_subcommand("mushra", "MOS, ranks, preferences and Holm-corrected paired t-tests");
  std::string out_dir;
  double alpha = 0.05;
  mushra->add_option("scores", input, "TSV listener, sentence, system, score")->required();
  mushra->add_option("--alpha", alpha, "Family-wise significance level")->capture_default_str();
  mushra->add_option("--out-dir", out_dir, "Directory for the report files")->required();
  mushra->callback([&] {
    const auto session = metrics::MushraSession::parse(read_input(input));
    for (const auto& w : session.warnings()) std::cerr << "warning: " << w << '\n';
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_file(dir / "mos.tsv", metrics::mos_report(metrics::mushra_mos(session)));
    write_file(dir / "ranks.tsv", metrics::ranks_report(session, metrics::mushra_ranks(session)));
    write_file(dir / "preference.tsv", metrics::preference_report(session, metrics::preference_matrix(session)));
    write_file(dir / "ttests.tsv",
               metrics::ttest_report(metrics::paired_t_holm(session, metrics::all_pairs(session), alpha), alpha));
  });

  // pipeline ----------------------------------------------------------------
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Staged corpus-to-durations pipeline");
  pipeline_cmd->require_subcommand(1);
  auto* pipeline_run = pipeline_cmd->add_subcommand("run", "Run pipeline stages");
  std::string from = "phones", to = "eval";
  pipeline_run->add_option("--config", config_path, "Pipeline config file")->required();
  pipeline_run->add_option("--from", from, "First stage: phones, features, train, predict, eval")->capture_default_str();
  pipeline_run->add_option("--to", to, "Last stage")->capture_default_str();
  pipeline_run->footer(
      "Config sections and keys:\n"
      "  [pipeline] language, scheme (uni|multi|g2p|cps), corpus, output, seed, durations\n"
      "  [split]    train, dev, test\n"
      "  [cps]      mapping, schwa (retain|word_final_delete)\n"
      "  [multi]    inventory\n"
      "  [g2p]      lexicon, model, order\n"
      "  [train]    hidden_layers, width, a, b, l2, batch_size, learning_rate, momentum,\n"
      "             momentum_late, schedule_switch, top_layer_factor, max_epochs, seed\n"
      "ASCII2PHONE_SEED overrides every seed.");
  pipeline_run->callback([&] {
    const auto cfg = pipeline::PipelineConfig::load(config_path);
    const auto manifest = pipeline::run_pipeline(cfg, pipeline::parse_stage(from), pipeline::parse_stage(to));
    std::cerr << "run " << manifest.run_id << " -> " << cfg.output.string() << '\n';
  });

  // corpus ------------------------------------------------------------------
  auto* corpus_cmd = app.add_subcommand("corpus", "Parallel corpus utilities");
  corpus_cmd->require_subcommand(1);
  auto* corpus_split = corpus_cmd->add_subcommand("split", "Shuffle and split a parallel corpus");
  SplitFractions fractions;
  std::uint64_t seed = 1;
  corpus_split->add_option("corpus", input, "TSV id, native, ascii")->required();
  corpus_split->add_option("--language", language, "Script of the native column")->capture_default_str();
  corpus_split->add_option("--train", fractions.train, "Train fraction")->capture_default_str();
  corpus_split->add_option("--dev", fractions.dev, "Dev fraction")->capture_default_str();
  corpus_split->add_option("--test", fractions.test, "Test fraction")->capture_default_str();
  corpus_split->add_option("--seed", seed, "Shuffle seed")->capture_default_str();
  corpus_split->add_option("--out-dir", out_dir, "Writes train.tsv, dev.tsv, test.tsv")->required();
  corpus_split->callback([&] {
    const auto records = pipeline::parse_corpus(read_input(input), scriptcore::parse_language(language));
    const auto used_seed = seeded(seed);
    const auto parts = pipeline::split_corpus(records, fractions, used_seed);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    const auto header = "# seed\t" + std::to_string(used_seed) + "\n";
    write_file(dir / "train.tsv", header + pipeline::serialize_corpus(parts.train));
    write_file(dir / "dev.tsv", header + pipeline::serialize_corpus(parts.dev));
    write_file(dir / "test.tsv", header + pipeline::serialize_corpus(parts.test));
    std::cerr << parts.train.size() << " train, " << parts.dev.size() << " dev, " << parts.test.size() << " test\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pipeline::StageFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.cause() == pipeline::StageFailure::Cause::data ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
