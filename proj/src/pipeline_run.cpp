#include <chrono>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "a2p/g2p.hpp"
#include "a2p/graphemes.hpp"
#include "a2p/metrics.hpp"
#include "a2p/pipeline.hpp"
#include "a2p/util.hpp"

namespace a2p::pipeline {

namespace {

constexpr std::string_view kProvenanceTag = "# a2p-run\t";
constexpr std::array<std::string_view, 3> kSplitNames = {"train", "dev", "test"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

PhoneSequence with_silences(const std::vector<std::vector<std::string>>& words, std::string inventory) {
  PhoneSequence seq;
  seq.inventory = std::move(inventory);
  seq.phones.emplace_back(kSilence);
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w > 0) seq.word_starts.push_back(seq.phones.size());
    seq.phones.insert(seq.phones.end(), words[w].begin(), words[w].end());
  }
  seq.phones.emplace_back(kSilence);
  return seq;
}

struct Utterance {
  std::string id;
  std::string split;
  PhoneSequence phones;
};

// Shared state of one run: the config, its id, and the output directory.
class Run {
 public:
  Run(const PipelineConfig& config, RunManifest& manifest) : cfg_(config), manifest_(manifest) {}

  void phones();
  void features();
  void train();
  void predict();
  void eval();

 private:
  fs::path out(std::string_view name) const { return cfg_.output / fs::path(std::string(name)); }

  void write(std::string_view name, const std::string& body) {
    write_file(out(name), provenance_line(manifest_.run_id) + body);
    outputs_.emplace_back(name);
  }

  // Reads an earlier stage's file, rejecting output of a different run.
  std::string read(std::string_view name) const {
    const auto path = out(name);
    if (!fs::exists(path)) {
      throw DataError("missing " + path.string() + "; run the earlier stages first");
    }
    auto text = read_file(path);
    const auto id = read_provenance(text);
    if (id != manifest_.run_id) {
      throw DataError("mixed provenance: " + path.string() + " comes from run " + id + ", this run is " +
                      manifest_.run_id);
    }
    return text;
  }

  std::vector<Utterance> read_phones() const;
  neural::FeatureSpec feature_spec() const;
  std::map<std::string, std::vector<neural::DurationRecord>> reference_durations() const;
  std::string_view eval_split() const;

  const PipelineConfig& cfg_;
  RunManifest& manifest_;

 public:
  std::vector<std::string> outputs_;
};

std::vector<Utterance> Run::read_phones() const {
  std::vector<Utterance> out;
  for (const auto& line : split(read(files::kPhones), '\n')) {
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw DataError("phones file: malformed line");
    out.push_back({cols[0], cols[1], PhoneSequence::parse(cols[2])});
  }
  return out;
}

neural::FeatureSpec Run::feature_spec() const {
  switch (cfg_.scheme) {
    case Scheme::uni: return neural::FeatureSpec::for_inventory(graphemes::uni_inventory());
    case Scheme::multi:
      return neural::FeatureSpec::for_inventory(
          cfg_.multi_inventory ? PhoneInventory::load(cfg_.multi_inventory->string()) : graphemes::default_multi_inventory());
    case Scheme::g2p:
    case Scheme::cps: return neural::FeatureSpec::for_inventory(scriptcore::cps_inventory());
  }
  throw ConfigError("unknown scheme");
}

std::map<std::string, std::vector<neural::DurationRecord>> Run::reference_durations() const {
  std::map<std::string, std::vector<neural::DurationRecord>> by_utterance;
  for (auto& r : neural::parse_duration_records(read_file(*cfg_.durations))) {
    by_utterance[r.utterance].push_back(std::move(r));
  }
  return by_utterance;
}

std::string_view Run::eval_split() const {
  // The held-out part that predictions are scored on; small corpora may
  // have an empty test (or dev) portion.
  const auto utts = read_phones();
  for (auto name : {"test", "dev", "train"}) {
    for (const auto& u : utts)
      if (u.split == name) return name;
  }
  throw EmptyCorpus();
}

void Run::phones() {
  const auto corpus = load_corpus(cfg_.corpus, cfg_.language);
  const auto idx = split_indices(corpus.size(), cfg_.split, cfg_.seed);
  std::vector<std::string_view> split_of(corpus.size());
  for (auto i : idx.train) split_of[i] = "train";
  for (auto i : idx.dev) split_of[i] = "dev";
  for (auto i : idx.test) split_of[i] = "test";

  std::optional<scriptcore::ScriptMappingTable> table;
  std::optional<PhoneInventory> multi;
  std::optional<g2p::G2PModel> model;
  switch (cfg_.scheme) {
    case Scheme::cps:
      table = cfg_.mapping ? scriptcore::ScriptMappingTable::load(cfg_.language, cfg_.mapping->string(), cfg_.schwa)
                           : scriptcore::ScriptMappingTable::builtin(cfg_.language, cfg_.schwa);
      break;
    case Scheme::multi:
      multi = cfg_.multi_inventory ? PhoneInventory::load(cfg_.multi_inventory->string())
                                   : graphemes::default_multi_inventory();
      graphemes::check_inventory(*multi);
      break;
    case Scheme::g2p:
      if (cfg_.g2p_model) {
        model = g2p::G2PModel::load(cfg_.g2p_model->string());
      } else {
        const auto lexicon = g2p::PronunciationLexicon::load(cfg_.lexicon->string());
        const auto aligned = g2p::align_lexicon(lexicon, g2p::AlignConfig{});
        model = g2p::G2PModel::train(aligned.sequences, cfg_.g2p_order, g2p::SmoothingSpec{},
                                     {std::string(scriptcore::to_string(cfg_.language)), lexicon.checksum()});
        write(files::kG2PModel, model->serialize());
      }
      break;
    case Scheme::uni: break;
  }

  std::string body = "# id\tsplit\tphones\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& rec = corpus[i];
    const auto ascii = graphemes::normalize_ascii(rec.ascii);
    PhoneSequence seq;
    switch (cfg_.scheme) {
      case Scheme::uni: seq = graphemes::segment_uni(ascii); break;
      case Scheme::multi: seq = graphemes::segment_multi(ascii, *multi); break;
      case Scheme::cps: seq = with_silences(scriptcore::to_cps(rec.native, *table).words(), "cps"); break;
      case Scheme::g2p: {
        std::vector<std::vector<std::string>> words;
        for (const auto& w : split_whitespace(ascii)) words.push_back(g2p::transcribe(*model, w).phones);
        seq = with_silences(words, "cps");
        break;
      }
    }
    body += rec.id + '\t' + std::string(split_of[i]) + '\t' + seq.render() + '\n';
  }
  write(files::kPhones, body);
}

void Run::features() {
  const auto utts = read_phones();
  const auto spec = feature_spec();
  std::optional<std::map<std::string, std::vector<neural::DurationRecord>>> refs;
  if (cfg_.durations) refs = reference_durations();

  std::map<std::string_view, neural::Dataset> sets;
  std::map<std::string_view, std::vector<Eigen::MatrixXd>> xs, ys;
  for (const auto& u : utts) {
    auto x = neural::build_duration_features(u.phones, spec);
    xs[u.split].push_back(x);
    if (!refs) continue;
    auto it = refs->find(u.id);
    if (it == refs->end()) throw DataError("no reference durations for utterance '" + u.id + "'");
    const auto& recs = it->second;
    if (recs.size() != u.phones.size()) {
      throw DataError("utterance '" + u.id + "': " + std::to_string(u.phones.size()) + " phones but " +
                      std::to_string(recs.size()) + " duration rows");
    }
    Eigen::MatrixXd y(x.rows(), static_cast<Eigen::Index>(neural::DurationTarget::kSize));
    for (std::size_t p = 0; p < recs.size(); ++p) {
      if (recs[p].phone != u.phones.phones[p]) {
        throw DataError("utterance '" + u.id + "' phone " + std::to_string(p) + ": expected '" + u.phones.phones[p] +
                        "', durations have '" + recs[p].phone + "'");
      }
      for (std::size_t k = 0; k < neural::DurationTarget::kSize; ++k)
        y(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = recs[p].target.values()[k];
    }
    ys[u.split].push_back(std::move(y));
  }

  const auto schema = spec.schema();
  const auto outputs = refs ? neural::DurationTarget::kSize : 0;
  for (auto name : kSplitNames) {
    neural::Dataset d;
    d.input_schema = schema;
    if (refs) d.output_names.assign(neural::kDurationNames.begin(), neural::kDurationNames.end());
    Eigen::Index rows = 0;
    for (const auto& m : xs[name]) rows += m.rows();
    d.x.resize(rows, static_cast<Eigen::Index>(schema.size()));
    d.y.resize(rows, static_cast<Eigen::Index>(outputs));
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < xs[name].size(); ++i) {
      const auto n = xs[name][i].rows();
      d.x.middleRows(at, n) = xs[name][i];
      if (refs) d.y.middleRows(at, n) = ys[name][i];
      at += n;
    }
    d.check();
    const auto file = name == "train" ? files::kTrainFeatures : name == "dev" ? files::kDevFeatures : files::kTestFeatures;
    write(file, d.to_text());
  }
}

void Run::train() {
  const auto train = neural::Dataset::parse(read(files::kTrainFeatures));
  const auto dev = neural::Dataset::parse(read(files::kDevFeatures));
  if (train.y.cols() != static_cast<Eigen::Index>(neural::DurationTarget::kSize)) {
    throw ConfigError("the train stage needs reference durations (pipeline.durations)");
  }
  if (train.size() < 2) throw neural::TooFewSamples(train.size());
  auto result = neural::fit(train.x, train.y, dev.x, dev.y, cfg_.train);
  write(files::kDurationModel, result.net.serialize());

  std::string log = "# best_epoch\t" + std::to_string(result.best_epoch) + "\nepoch\tlearning_rate\tmomentum\ttrain_mse\tdev_mse\n";
  for (const auto& e : result.log) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu\t%.6g\t%.3g\t%.9g\t%.9g\n", e.epoch, e.learning_rate, e.momentum, e.train_loss,
                  e.dev_loss);
    log += buf;
  }
  write(files::kTrainingLog, log);
}

void Run::predict() {
  const auto net = neural::FeedForwardNet::parse(read(files::kDurationModel));
  const auto which = eval_split();
  const auto file = which == "train" ? files::kTrainFeatures : which == "dev" ? files::kDevFeatures : files::kTestFeatures;
  const auto data = neural::Dataset::parse(read(file));
  const auto predictions = neural::predict_durations(net, data.x);

  std::string body = "# split\t" + std::string(which) + "\n# utterance\tphone";
  for (auto n : neural::kDurationNames) body += "\t" + std::string(n);
  body += "\tfloored\n";
  std::size_t row = 0;
  for (const auto& u : read_phones()) {
    if (u.split != which) continue;
    for (const auto& phone : u.phones.phones) {
      if (row >= predictions.size()) throw DataError("predictions: feature rows do not match the phone file");
      const auto& p = predictions[row++];
      body += u.id + '\t' + phone;
      for (double v : p.values) body += '\t' + fmt(v);
      body += p.any_floored ? "\tyes\n" : "\tno\n";
    }
  }
  if (row != predictions.size()) throw DataError("predictions: feature rows do not match the phone file");
  write(files::kPredictions, body);
}

void Run::eval() {
  if (!cfg_.durations) throw ConfigError("the eval stage needs reference durations (pipeline.durations)");
  const auto refs = reference_durations();
  const auto text = read(files::kPredictions);
  std::string which = "?";
  std::map<std::string, std::size_t> position;
  std::vector<double> ref, pred;
  for (const auto& line : split(text, '\n')) {
    if (line.rfind("# split\t", 0) == 0) which = line.substr(8);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3 + neural::DurationTarget::kSize) throw DataError("predictions: malformed line");
    auto it = refs.find(cols[0]);
    if (it == refs.end()) throw DataError("no reference durations for utterance '" + cols[0] + "'");
    const auto k = position[cols[0]]++;
    if (k >= it->second.size() || it->second[k].phone != cols[1]) {
      throw DataError("utterance '" + cols[0] + "': predictions and references disagree at phone " + std::to_string(k));
    }
    // Only the five sub-state outputs are used; the phone duration is their sum.
    double sum = 0;
    for (std::size_t s = 0; s < neural::kStates; ++s) sum += std::stod(cols[2 + s]);
    pred.push_back(sum);
    ref.push_back(it->second[k].target.phone());
  }
  metrics::DurationRow row{std::string(scriptcore::to_string(cfg_.language)), std::string(system_label(cfg_.scheme)),
                           metrics::duration_rmse(ref, pred), metrics::duration_corr(ref, pred)};
  write(files::kReport, "# evaluated on\t" + which + "\n# phones\t" + std::to_string(ref.size()) + "\n" +
                            metrics::duration_report({row}));
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::phones: return "phones";
    case Stage::features: return "features";
    case Stage::train: return "train";
    case Stage::predict: return "predict";
    case Stage::eval: return "eval";
  }
  return "?";
}

Stage parse_stage(std::string_view text) {
  for (auto s : {Stage::phones, Stage::features, Stage::train, Stage::predict, Stage::eval}) {
    if (text == to_string(s)) return s;
  }
  throw ConfigError("unknown stage '" + std::string(text) + "' (phones, features, train, predict, eval)");
}

std::string provenance_line(const std::string& run_id) { return std::string(kProvenanceTag) + run_id + "\n"; }

std::string read_provenance(std::string_view text) {
  if (text.substr(0, kProvenanceTag.size()) != kProvenanceTag) throw DataError("file has no run header");
  auto rest = text.substr(kProvenanceTag.size());
  return std::string(rest.substr(0, rest.find('\n')));
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["run_id"] = run_id;
  j["tool_version"] = tool_version;
  j["config_checksum"] = config_checksum;
  j["seed"] = seed;
  j["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [path, sum] : input_checksums) j["inputs"][path] = sum;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    j["stages"].push_back({{"stage", std::string(to_string(s.stage))}, {"seconds", s.seconds}, {"outputs", s.outputs}});
  }
  return j.dump(2) + "\n";
}

RunManifest run_pipeline(const PipelineConfig& config, Stage first, Stage last) {
  config.validate();
  if (last < first) throw ConfigError("stage range is empty");

  RunManifest manifest;
  manifest.tool_version = std::string(kToolVersion);
  manifest.config_checksum = config.checksum;
  manifest.seed = config.seed;
  for (const auto& p : {std::optional<fs::path>(config.corpus), config.durations, config.mapping,
                        config.multi_inventory, config.lexicon, config.g2p_model}) {
    if (p) manifest.input_checksums[p->string()] = sha256_file(*p);
  }
  // The run id covers everything that can change an output byte.
  std::string key = manifest.tool_version + "\n" + config.checksum + "\n" + std::to_string(config.seed) + "\n" +
                    std::to_string(config.train.seed) + "\n";
  for (const auto& [path, sum] : manifest.input_checksums) key += sum + "\n";
  manifest.run_id = sha256_hex(key).substr(0, 16);

  fs::create_directories(config.output);
  Run run(config, manifest);
  for (auto s = static_cast<int>(first); s <= static_cast<int>(last); ++s) {
    const auto stage = static_cast<Stage>(s);
    const auto start = std::chrono::steady_clock::now();
    run.outputs_.clear();
    try {
      switch (stage) {
        case Stage::phones: run.phones(); break;
        case Stage::features: run.features(); break;
        case Stage::train: run.train(); break;
        case Stage::predict: run.predict(); break;
        case Stage::eval: run.eval(); break;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const DataError& e) {
      throw StageFailure(stage, e.what(), StageFailure::Cause::data);
    } catch (const std::exception& e) {
      throw StageFailure(stage, e.what(), StageFailure::Cause::internal);
    }
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    manifest.stages.push_back({stage, took.count(), run.outputs_});
  }
  write_file(config.output / std::string(files::kManifest), manifest.to_json());
  return manifest;
}

}  // namespace a2p::pipeline
