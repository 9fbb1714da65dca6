#pragma once

// Joint-sequence grapheme-to-phoneme transduction.
//
// A pronunciation lexicon is segmented into graphones (paired chunks of
// letters and phones) by EM over a unigram graphone model. The resulting
// graphone sequences train an n-gram model with interpolated absolute
// discounting; transcription is a beam search over graphone continuations
// whose letter sides spell the input word.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "a2p/error.hpp"
#include "a2p/phones.hpp"
#include "a2p/split.hpp"

namespace a2p::g2p {

enum class EntrySource { crowd, gold };

struct LexiconEntry {
  std::string word;
  std::vector<std::string> phones;
  EntrySource source = EntrySource::crowd;
};

class PronunciationLexicon {
 public:
  PronunciationLexicon() = default;
  /// Validates phones against `inventory` (the CPS inventory by default).
  explicit PronunciationLexicon(const PhoneInventory& inventory);

  /// Adds the entry unless the exact (word, phones) pair is present.
  /// Returns true when added. Throws DataError for empty or non [a-z] words
  /// and EmptyPronunciation for empty phone lists.
  bool add(LexiconEntry entry);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// `word<TAB>phone phone ...[<TAB>crowd|gold]` with `#` comments.
  static PronunciationLexicon parse(std::string_view text);
  static PronunciationLexicon load(const std::string& path);
  std::string serialize() const;
  std::string checksum() const;

 private:
  const PhoneInventory* inventory_ = nullptr;
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::size_t> keys_;
};

class EmptyPronunciation : public DataError {
 public:
  explicit EmptyPronunciation(const std::string& word)
      : DataError("empty pronunciation for '" + word + "'") {}
};

class UnalignableEntry : public DataError {
 public:
  explicit UnalignableEntry(const std::string& word)
      : DataError("no graphone segmentation for '" + word + "' within size limits") {}
};

class NoPathFound : public DataError {
 public:
  explicit NoPathFound(const std::string& word) : DataError("no graphone path spells '" + word + "'") {}
};

/// Parses the slash notation `/k/aa/q/`.
std::vector<std::string> parse_slash_pronunciation(std::string_view text);

PronunciationLexicon build_lexicon(std::span<const std::string> ascii_words,
                                   std::span<const std::vector<std::string>> pronunciations,
                                   EntrySource source = EntrySource::crowd);

struct Graphone {
  std::string letters;
  std::vector<std::string> phones;

  auto operator<=>(const Graphone&) const = default;
  bool operator==(const Graphone&) const = default;
  /// `letters:phone phone`, used for display and interning.
  std::string key() const;
};

using GraphoneSequence = std::vector<Graphone>;

struct AlignConfig {
  std::size_t gmax = 2;
  std::size_t pmax = 2;
  std::size_t em_iters = 20;
  /// Lets entries with more phones than gmax/pmax allow use letterless
  /// graphones instead of failing.
  bool epsilon_fallback = true;
};

struct AlignedCorpus {
  /// Maximum-likelihood segmentation per lexicon entry, in lexicon order.
  std::vector<GraphoneSequence> sequences;
  /// Corpus log-likelihood under the initial uniform model and after each
  /// EM iteration (em_iters + 1 values).
  std::vector<double> log_likelihood;
  /// Final unigram graphone probabilities.
  std::vector<std::pair<Graphone, double>> graphone_probs;
  std::size_t fallback_entries = 0;
};

AlignedCorpus align_lexicon(const PronunciationLexicon& lexicon, const AlignConfig& config);

struct SmoothingSpec {
  /// Absolute discount applied at every order.
  double discount = 0.5;
};

struct ModelMetadata {
  std::string language;
  std::string lexicon_checksum;
  std::size_t gmax = 2;
  std::size_t pmax = 2;
};

using TokenId = std::int32_t;

/// Graphone n-gram model with interpolated absolute discounting.
///
/// Tokens 0..V-1 are graphones; V is the end marker. The begin marker only
/// appears in histories. Probabilities are derived from stored counts on
/// demand, so a reloaded model is bit-identical.
class G2PModel {
 public:
  static constexpr TokenId kBegin = -1;
  static constexpr TokenId kUnknown = -2;

  static G2PModel train(std::span<const GraphoneSequence> corpus, int order,
                        const SmoothingSpec& smoothing = {}, ModelMetadata metadata = {});

  int order() const { return order_; }
  const SmoothingSpec& smoothing() const { return smoothing_; }
  const ModelMetadata& metadata() const { return metadata_; }
  const std::vector<Graphone>& vocabulary() const { return vocab_; }
  TokenId end_token() const { return static_cast<TokenId>(vocab_.size()); }
  /// Number of predictable events: graphones plus the end marker.
  std::size_t event_count() const { return vocab_.size() + 1; }

  std::optional<TokenId> find(const Graphone& g) const;
  /// Graphones whose letter side equals `letters` (empty for insertions).
  std::span<const TokenId> with_letters(std::string_view letters) const;
  std::size_t max_letters() const { return max_letters_; }

  /// P(token | history); only the last order-1 history tokens are used.
  double prob(std::span<const TokenId> history, TokenId token) const;
  double log_prob(std::span<const TokenId> history, TokenId token) const;

  /// Raw n-gram count of `token` after exactly `history`.
  double count(std::span<const TokenId> history, TokenId token) const;
  /// Total count of events after exactly `history`.
  double history_count(std::span<const TokenId> history) const;
  /// Every stored history (of every length), in a deterministic order.
  std::vector<std::vector<TokenId>> histories() const;

  std::string serialize() const;
  static G2PModel parse(std::string_view text);
  void save(const std::string& path) const;
  static G2PModel load(const std::string& path);

 private:
  struct HistoryStats {
    double total = 0;
    std::unordered_map<TokenId, double> successors;
  };
  struct HistoryHash {
    std::size_t operator()(const std::vector<TokenId>& h) const noexcept;
  };
  using Level = std::unordered_map<std::vector<TokenId>, HistoryStats, HistoryHash>;

  void index_vocabulary();

  int order_ = 1;
  SmoothingSpec smoothing_;
  ModelMetadata metadata_;
  std::vector<Graphone> vocab_;
  std::unordered_map<std::string, TokenId> vocab_index_;
  std::unordered_map<std::string, std::vector<TokenId>> by_letters_;
  std::size_t max_letters_ = 0;
  std::vector<Level> levels_;  // levels_[k]: histories of length k
};

struct DecodeOptions {
  std::size_t beam = 50;
  /// Letters with no single-letter graphone decode to themselves at
  /// `fallback_prob`; disabled, such words raise NoPathFound.
  bool letter_fallback = true;
  double fallback_prob = 1e-6;
};

struct Transcription {
  std::vector<std::string> phones;
  double log_prob = 0.0;
  GraphoneSequence graphones;
};

/// Best graphone sequence spelling `word`; ties on score go to the
/// lexicographically smaller phone sequence.
Transcription transcribe(const G2PModel& model, std::string_view word,
                         const DecodeOptions& options = {});

std::size_t edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp);

/// Sum of edit distances over sum of reference lengths. Throws
/// LengthMismatch and DataError("empty reference") when that sum is 0.
double phone_error_rate(std::span<const std::vector<std::string>> refs,
                        std::span<const std::vector<std::string>> hyps);

struct SweepConfig {
  std::vector<int> orders{1, 2, 3, 4, 5, 6};
  SplitFractions split;
  std::uint64_t seed = 7;
  AlignConfig align;
  SmoothingSpec smoothing;
  DecodeOptions decode;
  std::string language;
};

struct SweepRow {
  int order = 0;
  double train_per = 0;
  double dev_per = 0;
  double test_per = 0;
  /// dev and test pooled: edit distances over reference phones of both.
  double heldout_per = 0;
};

struct SweepReport {
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_dev = 0;
  std::size_t n_test = 0;
  std::vector<SweepRow> rows;  // ascending order

  std::string to_tsv() const;
};

/// Splits the lexicon, aligns the training part once, then trains and scores
/// one model per order. Empty dev/test portions report PER 0.
SweepReport per_sweep(const PronunciationLexicon& lexicon, const SweepConfig& config);

}  // namespace a2p::g2p
