#pragma once

// Feed-forward regression networks for duration and acoustic modelling.
//
// Inputs are linguistic features per phone (duration model) or per frame
// (acoustic model); outputs are z-scored targets. Hidden layers apply
// d(t) = a * tanh(b * t), the output layer is linear.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "a2p/error.hpp"
#include "a2p/phones.hpp"

namespace a2p::neural {

using Matrix = Eigen::MatrixXd;  // rows are samples
using Vector = Eigen::VectorXd;

class TooFewSamples : public DataError {
 public:
  explicit TooFewSamples(std::size_t n) : DataError("need at least 2 samples, got " + std::to_string(n)) {}
};

class EmptyBatch : public DataError {
 public:
  EmptyBatch() : DataError("empty batch") {}
};

// ---------------------------------------------------------------------------
// Linguistic features

/// Articulatory classes per phone, from the attribute table files.
class PhoneAttributes {
 public:
  /// `attributes: <name> ...` header, then `symbol<TAB>attr attr ...`.
  static PhoneAttributes parse(std::string_view text);
  static PhoneAttributes builtin(InventoryKind kind);

  const std::vector<std::string>& names() const { return names_; }
  /// Attribute bits of `symbol` in names() order; UnknownPhone if absent.
  const std::vector<bool>& of(std::string_view symbol) const;
  bool has(std::string_view symbol, std::string_view attribute) const;
  bool covers(const PhoneInventory& inventory) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::pair<std::string, std::vector<bool>>> rows_;
};

enum class FeatureKind { binary, numeric };

struct FeatureSchema {
  std::vector<std::string> names;
  std::vector<FeatureKind> kinds;

  std::size_t size() const { return names.size(); }
  void add(std::string name, FeatureKind kind) {
    names.push_back(std::move(name));
    kinds.push_back(kind);
  }
  bool operator==(const FeatureSchema&) const = default;
};

/// The question set: quinphone identities over `inventory`, positional
/// counters, and articulatory bits of the previous, current and next phone
/// when attributes are given.
struct FeatureSpec {
  PhoneInventory inventory;
  std::optional<PhoneAttributes> attributes;

  /// Default spec for an inventory: attributes for multi and CPS, none for uni.
  static FeatureSpec for_inventory(const PhoneInventory& inventory);

  /// 5 * |inventory| + 6 + 3 * |attributes|.
  FeatureSchema schema() const;
  bool is_vowel(std::string_view phone) const;
};

inline constexpr std::array<std::string_view, 6> kPositionalFeatures = {
    "phone_in_syllable_fwd", "phone_in_syllable_bwd", "syllable_in_word_fwd",
    "syllable_in_word_bwd",  "word_in_sentence_fwd",  "word_in_sentence_bwd"};

/// One row per phone. Edge padding uses `sil`; positional counters are
/// zero-based and zero for `sil`. Throws UnknownPhone.
Matrix build_duration_features(const PhoneSequence& phones, const FeatureSpec& spec);

/// Syllable index within its word for every phone (-1 for phones outside
/// words). Each maximal vowel run is a nucleus; a single consonant between
/// nuclei starts the next syllable, longer clusters split after the first.
std::vector<int> syllabify(const PhoneSequence& phones, const FeatureSpec& spec);

inline constexpr std::size_t kStates = 5;
inline constexpr std::size_t kFramePositionFeatures = 9;
inline constexpr std::array<std::string_view, kFramePositionFeatures> kFramePositionNames = {
    "frame_in_state_fwd", "frame_in_state_bwd", "frame_in_phone_fwd",
    "frame_in_phone_bwd", "state_in_phone_fwd", "state_in_phone_bwd",
    "state_duration",     "phone_duration",     "phone_fraction_elapsed"};

struct FrameContext {
  std::size_t state = 0;           // 0-based state index
  std::size_t frame_in_state = 0;  // 0-based
  std::size_t state_frames = 1;
  std::size_t frame_in_phone = 0;  // 0-based
  std::size_t phone_frames = 1;
  std::size_t states = kStates;
};

/// `phone_features` followed by the 9 frame-position values.
Vector build_acoustic_features(const Vector& phone_features, const FrameContext& frame);

/// Frame rows for every phone, expanded by its sub-state durations (frames,
/// rounded to the nearest integer; states of zero frames are skipped).
Matrix expand_to_frames(const Matrix& phone_features,
                        const std::vector<std::array<double, kStates>>& state_durations);

FeatureSchema acoustic_schema(const FeatureSchema& phone_schema);

// ---------------------------------------------------------------------------
// Targets

/// Five sub-state durations, then phone, syllable and word duration (frames).
class DurationTarget {
 public:
  static constexpr std::size_t kSize = 8;
  /// Throws DataError on negative values or when the sub-states do not add up
  /// to the phone duration within half a frame.
  explicit DurationTarget(const std::array<double, kSize>& values);
  const std::array<double, kSize>& values() const { return values_; }
  double phone() const { return values_[5]; }

 private:
  std::array<double, kSize> values_;
};

inline constexpr std::array<std::string_view, DurationTarget::kSize> kDurationNames = {
    "state1", "state2", "state3", "state4", "state5", "phone", "syllable", "word"};

/// Layout of an acoustic frame: MCC, BAP and log-F0 blocks, each optionally
/// followed by its deltas and delta-deltas, then the voiced flag.
struct AcousticLayout {
  std::size_t mcc = 25;
  std::size_t bap = 5;
  bool deltas = true;

  std::size_t width(std::size_t block) const { return deltas ? 3 * block : block; }
  std::size_t mcc_offset() const { return 0; }
  std::size_t bap_offset() const { return width(mcc); }
  std::size_t lf0_offset() const { return width(mcc) + width(bap); }
  std::size_t vuv_offset() const { return lf0_offset() + width(1); }
  std::size_t size() const { return vuv_offset() + 1; }
  std::vector<std::string> names() const;
};

/// Per-phone reference durations as read from an alignment file.
struct DurationRecord {
  std::string utterance;
  std::string phone;
  DurationTarget target;
};

/// TSV `utterance<TAB>phone<TAB>s1..s5<TAB>phone<TAB>syllable<TAB>word`,
/// one row per phone, `#` comments. Every row is checked as a DurationTarget.
std::vector<DurationRecord> parse_duration_records(std::string_view text);
std::string serialize_duration_records(const std::vector<DurationRecord>& records);

// ---------------------------------------------------------------------------
// Network

/// Input scaling: per dimension, train min..max maps onto [0.01, 0.99];
/// dimensions with no range map to 0.5.
struct InputNormalizer {
  Vector min;
  Vector max;

  Matrix apply(const Matrix& x) const;
};

/// Output scaling: per dimension z-score with the 1/N variance; dimensions
/// with no variance map to 0 (and back to the mean).
struct OutputNormalizer {
  Vector mean;
  Vector stddev;

  Matrix apply(const Matrix& y) const;
  Matrix invert(const Matrix& z) const;
};

struct Normalizers {
  InputNormalizer input;
  OutputNormalizer output;
};

Normalizers fit_normalizers(const Matrix& inputs, const Matrix& outputs);

struct NetShape {
  std::size_t inputs = 0;
  std::vector<std::size_t> hidden;
  std::size_t outputs = 0;
  double a = 1.7159;
  double b = 2.0 / 3.0;
};

struct Layer {
  Matrix weights;  // out x in
  Vector bias;     // out
};

class FeedForwardNet {
 public:
  FeedForwardNet() = default;
  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  FeedForwardNet(const NetShape& shape, Normalizers normalizers, std::uint64_t seed);

  const NetShape& shape() const { return shape_; }
  const Normalizers& normalizers() const { return norm_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Network output on already normalized inputs (normalized output space).
  Matrix forward_normalized(const Matrix& x) const;
  /// Raw features in, denormalized outputs (or normalized when asked) out.
  /// Throws DimensionMismatch.
  Matrix predict(const Matrix& features, bool denormalize = true) const;

  std::string serialize() const;
  static FeedForwardNet parse(std::string_view text);
  void save(const std::string& path) const;
  static FeedForwardNet load(const std::string& path);

  bool operator==(const FeedForwardNet&) const;

 private:
  NetShape shape_;
  Normalizers norm_;
  std::vector<Layer> layers_;
};

/// Same shapes as the network's layers.
using Gradient = std::vector<Layer>;

/// Mean over the batch of the summed squared error, plus l2 * sum of squared
/// weights (biases excluded). x and y are normalized.
double loss(const FeedForwardNet& net, const Matrix& x, const Matrix& y, double l2);
Gradient gradient(const FeedForwardNet& net, const Matrix& x, const Matrix& y, double l2);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t hidden_layers = 6;
  std::size_t width = 1024;
  double a = 1.7159;
  double b = 2.0 / 3.0;
  double l2 = 1e-5;
  std::size_t batch_size = 64;
  double learning_rate = 0.002;
  double momentum = 0.3;
  double momentum_late = 0.9;
  /// Epochs (1-based) up to this one use the initial momentum and the full
  /// rate; afterwards momentum switches and the rate halves every epoch.
  std::size_t schedule_switch = 10;
  double top_layer_factor = 0.5;
  std::size_t max_epochs = 30;
  std::uint64_t seed = 1;

  /// Throws ConfigError.
  void validate() const;
  /// Rate of weight layer `layer` (0-based of `layers`) in 1-based `epoch`.
  double rate(std::size_t epoch, std::size_t layer, std::size_t layers) const;
  double momentum_at(std::size_t epoch) const;
  NetShape shape(std::size_t inputs, std::size_t outputs) const;

  /// Acoustic defaults: batches of 256.
  static TrainConfig acoustic();
  /// Duration defaults: batches of 64.
  static TrainConfig duration();
};

struct EpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0;
  double momentum = 0;
  double train_loss = 0;  // mean squared error over the train set (normalized)
  double dev_loss = 0;
};

struct TrainResult {
  FeedForwardNet net;  // weights of the best dev epoch
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log;
};

/// Mini-batch gradient descent with classical momentum. `net` supplies the
/// initial weights and frozen normalizers; x/y are raw features and targets.
TrainResult train(const FeedForwardNet& net, const Matrix& train_x, const Matrix& train_y,
                  const Matrix& dev_x, const Matrix& dev_y, const TrainConfig& config);

/// Fits normalizers on the training data, initialises a network of the
/// configured shape and trains it.
TrainResult fit(const Matrix& train_x, const Matrix& train_y, const Matrix& dev_x, const Matrix& dev_y,
                const TrainConfig& config);

/// Mean squared error (summed over dims) of the net in normalized space.
double mse(const FeedForwardNet& net, const Matrix& x, const Matrix& y);

struct DurationPrediction {
  std::array<double, DurationTarget::kSize> values{};
  std::array<bool, DurationTarget::kSize> floored{};
  bool any_floored = false;

  /// The five sub-state durations; the rest are auxiliary outputs.
  std::array<double, kStates> states() const;
};

/// Per-phone predictions of an 8-output duration net; values below
/// `floor_frames` are raised to it and flagged.
std::vector<DurationPrediction> predict_durations(const FeedForwardNet& net, const Matrix& features,
                                                  double floor_frames = 1.0);

// ---------------------------------------------------------------------------
// Datasets

struct Dataset {
  FeatureSchema input_schema;
  std::vector<std::string> output_names;
  Matrix x;
  Matrix y;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  /// Throws DimensionMismatch when shapes disagree with the schema.
  void check() const;

  /// Text layout: `a2p-dataset 1`, `inputs N` + `name<TAB>binary|numeric`
  /// lines, `outputs M` + names, `rows R`, then R lines of N+M values.
  std::string to_text() const;
  static Dataset from_text(std::string_view text);
  /// Binary layout (little endian): "A2PD", u32 version, u32 N, u32 M,
  /// u64 R, names as u32 length + bytes (inputs with a kind byte), then R
  /// rows of N+M float64.
  std::string to_binary() const;
  static Dataset from_binary(std::string_view bytes);

  void save(const std::string& path, bool binary = false) const;
  /// Detects the layout from the first bytes.
  static Dataset load(const std::string& path);
  static Dataset parse(std::string_view bytes);
};

}  // namespace a2p::neural
