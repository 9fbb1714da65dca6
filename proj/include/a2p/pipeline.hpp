#pragma once

// Corpus ingestion, configuration and the staged text-to-durations pipeline:
// phones -> features -> train -> predict -> eval. Every stage writes files
// that the next stage reads back; each file carries the run id of the
// configuration and inputs that produced it.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "a2p/error.hpp"
#include "a2p/neural.hpp"
#include "a2p/scriptcore.hpp"
#include "a2p/split.hpp"

namespace a2p::pipeline {

namespace fs = std::filesystem;

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kSeedEnv = "ASCII2PHONE_SEED";

/// Phone scheme of a system. `cps` is the benchmark built from native script.
enum class Scheme { uni, multi, g2p, cps };
std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view text);
/// System label used in reports: UGM, MGM, G2P, BMK.
std::string_view system_label(Scheme scheme);

// ---------------------------------------------------------------------------
// Corpus

struct CorpusRecord {
  std::string id;
  std::string native;
  std::string ascii;
};

/// TSV `id<TAB>native<TAB>ascii`, `#` comments. Checks UTF-8, unique ids and
/// that both sides have the same number of words (native words as produced
/// by the script converter, ASCII words after normalization).
std::vector<CorpusRecord> parse_corpus(std::string_view text, scriptcore::Language language);
std::vector<CorpusRecord> load_corpus(const fs::path& path, scriptcore::Language language);
std::string serialize_corpus(const std::vector<CorpusRecord>& records);

/// Deterministic shuffle by seed, then dev/test sizes rounded down with the
/// remainder in train. Throws EmptyCorpus.
Split<CorpusRecord> split_corpus(const std::vector<CorpusRecord>& corpus, const SplitFractions& fractions,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Configuration

/// Flat `key = value` text with `[section]` headers (INI). Unknown sections
/// or keys are ConfigErrors so that typos do not pass silently.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const fs::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  /// Keys are `section.name`; keys before any section have no prefix.
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  /// Throws ConfigError naming the first key not in `allowed`.
  void require_known(const std::vector<std::string>& allowed) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Training settings from `prefix.*` keys, starting from `base`.
neural::TrainConfig train_config_from(const KeyValueConfig& config, const std::string& prefix,
                                      neural::TrainConfig base);
/// Keys understood by train_config_from, without prefix.
const std::vector<std::string>& train_config_keys();

struct PipelineConfig {
  scriptcore::Language language = scriptcore::Language::hindi;
  Scheme scheme = Scheme::uni;
  fs::path corpus;
  fs::path output;
  std::uint64_t seed = 1;
  SplitFractions split;

  std::optional<fs::path> mapping;            // cps: mapping table, else the shipped one
  scriptcore::SchwaPolicy schwa = scriptcore::SchwaPolicy::retain;
  std::optional<fs::path> multi_inventory;    // multi: inventory file, else the shipped one
  std::optional<fs::path> lexicon;            // g2p: lexicon to train from
  std::optional<fs::path> g2p_model;          // g2p: pretrained model
  int g2p_order = 6;
  std::optional<fs::path> durations;          // reference per-phone durations
  neural::TrainConfig train = neural::TrainConfig::duration();

  /// SHA-256 of the configuration text the config was read from.
  std::string checksum;

  /// Relative paths resolve against the config file's directory. The seed
  /// environment variable, when set, overrides every seed.
  static PipelineConfig parse(std::string_view text, const fs::path& base_dir = {});
  static PipelineConfig load(const fs::path& path);
  /// Checks that referenced files exist and scheme requirements hold.
  void validate() const;
};

/// Seed from the environment override, if set and numeric.
std::optional<std::uint64_t> seed_override();

// ---------------------------------------------------------------------------
// Runs

enum class Stage { phones, features, train, predict, eval };
inline constexpr std::size_t kStageCount = 5;
std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

class StageFailure : public Error {
 public:
  /// Whether the underlying problem was bad input data or an internal fault.
  enum class Cause { data, internal };

  StageFailure(Stage stage, const std::string& what, Cause cause)
      : Error("stage '" + std::string(to_string(stage)) + "' failed: " + what), stage_(stage), cause_(cause) {}
  Stage stage() const { return stage_; }
  Cause cause() const { return cause_; }

 private:
  Stage stage_;
  Cause cause_;
};

struct StageRecord {
  Stage stage;
  double seconds = 0;
  std::vector<std::string> outputs;  // relative to the output directory
};

struct RunManifest {
  std::string run_id;
  std::string config_checksum;
  std::map<std::string, std::string> input_checksums;  // path -> sha256
  std::string tool_version;
  std::uint64_t seed = 0;
  std::vector<StageRecord> stages;

  std::string to_json() const;
};

/// Header line written at the top of every output file.
std::string provenance_line(const std::string& run_id);
/// Run id recorded in the first line of `text`; DataError if there is none.
std::string read_provenance(std::string_view text);

/// Runs stages `first`..`last` in order. Inputs from earlier stages are read
/// from the output directory and must carry this run's id.
RunManifest run_pipeline(const PipelineConfig& config, Stage first = Stage::phones, Stage last = Stage::eval);

/// Output file names inside the output directory.
namespace files {
inline constexpr std::string_view kPhones = "phones.tsv";
inline constexpr std::string_view kG2PModel = "g2p.model";
inline constexpr std::string_view kTrainFeatures = "train.features";
inline constexpr std::string_view kDevFeatures = "dev.features";
inline constexpr std::string_view kTestFeatures = "test.features";
inline constexpr std::string_view kDurationModel = "duration.net";
inline constexpr std::string_view kTrainingLog = "training_log.tsv";
inline constexpr std::string_view kPredictions = "predicted_durations.tsv";
inline constexpr std::string_view kReport = "duration_report.tsv";
inline constexpr std::string_view kManifest = "manifest.json";
}  // namespace files

}  // namespace a2p::pipeline
