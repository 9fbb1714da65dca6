#pragma once

// Objective distortion metrics, duration accuracy and MUSHRA statistics.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "a2p/error.hpp"
#include "a2p/neural.hpp"

namespace a2p::metrics {

using neural::AcousticLayout;
using neural::Matrix;

class EmptySequence : public DataError {
 public:
  EmptySequence() : DataError("empty frame sequence") {}
};

class NoVoicedFrames : public DataError {
 public:
  NoVoicedFrames() : DataError("no frames voiced in both reference and prediction") {}
};

class ZeroVariance : public DataError {
 public:
  explicit ZeroVariance(const std::string& what) : DataError("zero variance: " + what) {}
};

class TooFewObservations : public DataError {
 public:
  explicit TooFewObservations(std::size_t n)
      : DataError("need at least 2 paired observations, got " + std::to_string(n)) {}
};

// ---------------------------------------------------------------------------
// Acoustic frames

/// Reference and predicted acoustic frames (rows) in the same layout.
struct FramePair {
  Matrix ref;
  Matrix pred;
  AcousticLayout layout;
  double frame_ms = 5.0;

  /// Throws EmptySequence, LengthMismatch or DimensionMismatch.
  void check() const;
};

enum class Alignment { truncate, warp };

/// Brings `pred` onto the reference time axis. `truncate` cuts both to the
/// shorter length; `warp` maps every reference frame of phone i onto the
/// proportionally placed frame of predicted phone i, using per-phone frame
/// counts of both sides.
FramePair align_frames(const Matrix& ref, const Matrix& pred, const AcousticLayout& layout, Alignment mode,
                       const std::vector<std::size_t>& ref_durations = {},
                       const std::vector<std::size_t>& pred_durations = {});

/// Mean over frames of (10 / ln 10) * sqrt(2 * sum_d (a_d - b_d)^2), over all
/// columns of the two blocks.
double cepstral_distortion(const Matrix& ref, const Matrix& pred);

/// Inclusive range of static MCC coefficients; c0 is excluded by default.
struct DimRange {
  std::size_t first = 1;
  std::size_t last = 24;
};

double mcd(const FramePair& pair, DimRange dims = {});
/// Distortion over the static BAP block.
double bap_distortion(const FramePair& pair);
/// RMSE of exp(logF0) in Hz over frames voiced in both tracks.
double f0_rmse(const FramePair& pair);
double f0_rmse(const std::vector<double>& ref_lf0, const std::vector<bool>& ref_voiced,
               const std::vector<double>& pred_lf0, const std::vector<bool>& pred_voiced);
/// Percentage of frames whose voiced flags (> 0.5) disagree.
double vuv_error(const FramePair& pair);
double vuv_error(const std::vector<bool>& ref, const std::vector<bool>& pred);

/// Whitespace-separated frame matrix, one frame per line, `#` comments.
Matrix parse_frames(std::string_view text);
Matrix load_frames(const std::string& path);

// ---------------------------------------------------------------------------
// Durations

double duration_rmse(const std::vector<double>& ref, const std::vector<double>& pred);
double duration_corr(const std::vector<double>& ref, const std::vector<double>& pred);

// ---------------------------------------------------------------------------
// Reports in the layout of the published result tables

struct ObjectiveRow {
  std::string language;
  std::string method;
  double mcd_db = 0;
  double bap_db = 0;
  double f0_rmse_hz = 0;
  double vuv_error_pct = 0;
};

struct DurationRow {
  std::string language;
  std::string method;
  double rmse_frames = 0;
  double pearson_r = 0;
};

std::string objective_report(const std::vector<ObjectiveRow>& rows);
std::vector<ObjectiveRow> parse_objective_report(std::string_view text);
std::string duration_report(const std::vector<DurationRow>& rows);
std::vector<DurationRow> parse_duration_report(std::string_view text);

// ---------------------------------------------------------------------------
// MUSHRA

struct MushraRow {
  std::string listener;
  std::string sentence;
  std::vector<double> scores;  // one per system, in session order
};

class MushraSession {
 public:
  MushraSession(std::vector<std::string> systems, std::vector<MushraRow> rows);

  /// TSV `listener<TAB>sentence<TAB>system<TAB>score`, optional header line,
  /// `#` comments. Systems and rows keep first-appearance order; every row
  /// must score every system exactly once.
  static MushraSession parse(std::string_view text);

  const std::vector<std::string>& systems() const { return systems_; }
  const std::vector<MushraRow>& rows() const { return rows_; }
  std::size_t index_of(std::string_view system) const;
  /// Rows without a score of exactly 100, as readable messages.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<std::string> systems_;
  std::vector<MushraRow> rows_;
  std::vector<std::string> warnings_;
};

struct SystemScore {
  std::string system;
  std::size_t n = 0;
  double mean = 0;
  double stddev = 0;  // N - 1 convention; 0 for a single cell
};

std::vector<SystemScore> mushra_mos(const MushraSession& session);

/// Ascending ranks 1..n, ties share the mean of their positions.
std::vector<double> rank_row(const std::vector<double>& scores);
std::vector<std::vector<double>> mushra_ranks(const MushraSession& session);

/// Entry (y, x): fraction of rows where system y scored above system x.
Matrix preference_matrix(const MushraSession& session);
/// Fraction of rows where y and x tie.
Matrix tie_matrix(const MushraSession& session);

/// Holm step-down: sorted p-values p_(k) are rejected while p_(k) <= alpha / (m - k).
std::vector<bool> holm(const std::vector<double>& p_values, double alpha);
std::vector<bool> bonferroni(const std::vector<double>& p_values, double alpha);

struct PairedTest {
  std::string a;
  std::string b;
  std::size_t n = 0;
  double mean_diff = 0;  // a - b
  double t = 0;
  double p = 1;
  bool degenerate = false;  // all differences equal
  bool significant = false;  // after Holm
  bool significant_bonferroni = false;
};

/// Two-sided paired t-test on per-row differences. Degenerate pairs (zero
/// variance) get p = 0 when the difference is nonzero and p = 1 otherwise.
PairedTest paired_t(const std::vector<double>& a, const std::vector<double>& b);
std::vector<PairedTest> paired_t_holm(const MushraSession& session,
                                      const std::vector<std::pair<std::string, std::string>>& pairs,
                                      double alpha = 0.05);
/// All unordered pairs of systems, in session order.
std::vector<std::pair<std::string, std::string>> all_pairs(const MushraSession& session);

std::string mos_report(const std::vector<SystemScore>& scores);
std::string ranks_report(const MushraSession& session, const std::vector<std::vector<double>>& ranks);
std::string preference_report(const MushraSession& session, const Matrix& preference);
std::string ttest_report(const std::vector<PairedTest>& tests, double alpha);

}  // namespace a2p::metrics
