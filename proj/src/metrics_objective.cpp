#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "a2p/metrics.hpp"
#include "a2p/util.hpp"

namespace a2p::metrics {

namespace {

constexpr double kDb = 10.0 / std::numbers::ln10;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

bool voiced(double flag) { return flag > 0.5; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw DataError("not a number: '" + s + "'");
  }
}

// Non-comment lines split on tabs, with the column-name header dropped.
std::vector<std::vector<std::string>> table_rows(std::string_view text, std::size_t fields,
                                                 std::string_view first_header) {
  std::vector<std::vector<std::string>> out;
  for (const auto& raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != fields) {
      throw DataError("expected " + std::to_string(fields) + " fields: '" + std::string(line) + "'");
    }
    if (cols[0] == first_header) continue;
    out.push_back(std::move(cols));
  }
  return out;
}

}  // namespace

void FramePair::check() const {
  if (ref.rows() == 0 || pred.rows() == 0) throw EmptySequence();
  if (ref.rows() != pred.rows()) {
    throw LengthMismatch(static_cast<std::size_t>(ref.rows()), static_cast<std::size_t>(pred.rows()));
  }
  if (static_cast<std::size_t>(ref.cols()) != layout.size()) {
    throw DimensionMismatch(layout.size(), static_cast<std::size_t>(ref.cols()));
  }
  if (pred.cols() != ref.cols()) {
    throw DimensionMismatch(static_cast<std::size_t>(ref.cols()), static_cast<std::size_t>(pred.cols()));
  }
}

FramePair align_frames(const Matrix& ref, const Matrix& pred, const AcousticLayout& layout, Alignment mode,
                       const std::vector<std::size_t>& ref_durations,
                       const std::vector<std::size_t>& pred_durations) {
  if (mode == Alignment::truncate) {
    const auto n = std::min(ref.rows(), pred.rows());
    FramePair pair{ref.topRows(n), pred.topRows(n), layout};
    pair.check();
    return pair;
  }
  if (ref_durations.size() != pred_durations.size()) {
    throw LengthMismatch(ref_durations.size(), pred_durations.size());
  }
  const auto total = [](const std::vector<std::size_t>& d) { return std::accumulate(d.begin(), d.end(), std::size_t{0}); };
  if (total(ref_durations) != static_cast<std::size_t>(ref.rows())) {
    throw LengthMismatch(total(ref_durations), static_cast<std::size_t>(ref.rows()));
  }
  if (total(pred_durations) != static_cast<std::size_t>(pred.rows())) {
    throw LengthMismatch(total(pred_durations), static_cast<std::size_t>(pred.rows()));
  }
  Matrix warped(ref.rows(), pred.cols());
  std::size_t r0 = 0, p0 = 0;
  for (std::size_t i = 0; i < ref_durations.size(); ++i) {
    const std::size_t R = ref_durations[i], P = pred_durations[i];
    if (R > 0 && P == 0) throw DataError("warp: predicted phone " + std::to_string(i) + " has no frames");
    for (std::size_t k = 0; k < R; ++k) {
      // Centre of reference frame k, scaled onto the predicted phone.
      const auto j = static_cast<std::size_t>((static_cast<double>(k) + 0.5) * static_cast<double>(P) / static_cast<double>(R));
      warped.row(idx(r0 + k)) = pred.row(idx(p0 + std::min(j, P - 1)));
    }
    r0 += R;
    p0 += P;
  }
  FramePair pair{ref, std::move(warped), layout};
  pair.check();
  return pair;
}

double cepstral_distortion(const Matrix& ref, const Matrix& pred) {
  if (ref.rows() == 0) throw EmptySequence();
  if (ref.rows() != pred.rows()) {
    throw LengthMismatch(static_cast<std::size_t>(ref.rows()), static_cast<std::size_t>(pred.rows()));
  }
  if (ref.cols() != pred.cols()) {
    throw DimensionMismatch(static_cast<std::size_t>(ref.cols()), static_cast<std::size_t>(pred.cols()));
  }
  double sum = 0;
  for (Eigen::Index t = 0; t < ref.rows(); ++t) sum += std::sqrt(2.0 * (ref.row(t) - pred.row(t)).squaredNorm());
  return kDb * sum / static_cast<double>(ref.rows());
}

double mcd(const FramePair& pair, DimRange dims) {
  pair.check();
  if (dims.first > dims.last || dims.last >= pair.layout.mcc) {
    throw ConfigError("MCD dimensions " + std::to_string(dims.first) + ".." + std::to_string(dims.last) +
                      " outside the " + std::to_string(pair.layout.mcc) + "-coefficient block");
  }
  const auto first = idx(pair.layout.mcc_offset() + dims.first);
  const auto n = idx(dims.last - dims.first + 1);
  return cepstral_distortion(pair.ref.middleCols(first, n), pair.pred.middleCols(first, n));
}

double bap_distortion(const FramePair& pair) {
  pair.check();
  const auto first = idx(pair.layout.bap_offset());
  const auto n = idx(pair.layout.bap);
  return cepstral_distortion(pair.ref.middleCols(first, n), pair.pred.middleCols(first, n));
}

double f0_rmse(const std::vector<double>& ref_lf0, const std::vector<bool>& ref_voiced,
               const std::vector<double>& pred_lf0, const std::vector<bool>& pred_voiced) {
  if (ref_lf0.empty()) throw EmptySequence();
  if (ref_lf0.size() != pred_lf0.size()) throw LengthMismatch(ref_lf0.size(), pred_lf0.size());
  if (ref_voiced.size() != ref_lf0.size()) throw LengthMismatch(ref_lf0.size(), ref_voiced.size());
  if (pred_voiced.size() != pred_lf0.size()) throw LengthMismatch(pred_lf0.size(), pred_voiced.size());
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < ref_lf0.size(); ++t) {
    if (!ref_voiced[t] || !pred_voiced[t]) continue;
    const double d = std::exp(ref_lf0[t]) - std::exp(pred_lf0[t]);
    sum += d * d;
    ++n;
  }
  if (n == 0) throw NoVoicedFrames();
  return std::sqrt(sum / static_cast<double>(n));
}

double f0_rmse(const FramePair& pair) {
  pair.check();
  const auto lf0 = idx(pair.layout.lf0_offset());
  const auto vuv = idx(pair.layout.vuv_offset());
  const auto rows = static_cast<std::size_t>(pair.ref.rows());
  std::vector<double> rl(rows), pl(rows);
  std::vector<bool> rv(rows), pv(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    rl[t] = pair.ref(idx(t), lf0);
    pl[t] = pair.pred(idx(t), lf0);
    rv[t] = voiced(pair.ref(idx(t), vuv));
    pv[t] = voiced(pair.pred(idx(t), vuv));
  }
  return f0_rmse(rl, rv, pl, pv);
}

double vuv_error(const std::vector<bool>& ref, const std::vector<bool>& pred) {
  if (ref.empty()) throw EmptySequence();
  if (ref.size() != pred.size()) throw LengthMismatch(ref.size(), pred.size());
  std::size_t wrong = 0;
  for (std::size_t t = 0; t < ref.size(); ++t) wrong += ref[t] != pred[t];
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(ref.size());
}

double vuv_error(const FramePair& pair) {
  pair.check();
  const auto vuv = idx(pair.layout.vuv_offset());
  std::vector<bool> r, p;
  for (Eigen::Index t = 0; t < pair.ref.rows(); ++t) {
    r.push_back(voiced(pair.ref(t, vuv)));
    p.push_back(voiced(pair.pred(t, vuv)));
  }
  return vuv_error(r, p);
}

Matrix parse_frames(std::string_view text) {
  std::vector<std::vector<double>> rows;
  for (const auto& raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    for (const auto& tok : split_whitespace(line)) row.push_back(parse_number(tok));
    if (!rows.empty() && row.size() != rows.front().size()) throw DimensionMismatch(rows.front().size(), row.size());
    rows.push_back(std::move(row));
  }
  Matrix m(idx(rows.size()), rows.empty() ? 0 : idx(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(idx(r), idx(c)) = rows[r][c];
  return m;
}

Matrix load_frames(const std::string& path) { return parse_frames(read_file(path)); }

double duration_rmse(const std::vector<double>& ref, const std::vector<double>& pred) {
  if (ref.size() != pred.size()) throw LengthMismatch(ref.size(), pred.size());
  if (ref.empty()) throw EmptySequence();
  double sum = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) sum += (ref[i] - pred[i]) * (ref[i] - pred[i]);
  return std::sqrt(sum / static_cast<double>(ref.size()));
}

double duration_corr(const std::vector<double>& ref, const std::vector<double>& pred) {
  if (ref.size() != pred.size()) throw LengthMismatch(ref.size(), pred.size());
  if (ref.size() < 2) throw DataError("correlation needs at least 2 phones");
  const double n = static_cast<double>(ref.size());
  const double mr = std::accumulate(ref.begin(), ref.end(), 0.0) / n;
  const double mp = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    sxy += (ref[i] - mr) * (pred[i] - mp);
    sxx += (ref[i] - mr) * (ref[i] - mr);
    syy += (pred[i] - mp) * (pred[i] - mp);
  }
  if (sxx == 0) throw ZeroVariance("reference durations");
  if (syy == 0) throw ZeroVariance("predicted durations");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string objective_report(const std::vector<ObjectiveRow>& rows) {
  std::string out = "language\tmethod\tmcd_db\tbap_db\tf0_rmse_hz\tvuv_error_pct\n";
  for (const auto& r : rows) {
    out += r.language + '\t' + r.method + '\t' + fmt(r.mcd_db) + '\t' + fmt(r.bap_db) + '\t' + fmt(r.f0_rmse_hz) +
           '\t' + fmt(r.vuv_error_pct) + '\n';
  }
  return out;
}

std::vector<ObjectiveRow> parse_objective_report(std::string_view text) {
  std::vector<ObjectiveRow> out;
  for (const auto& c : table_rows(text, 6, "language")) {
    out.push_back({c[0], c[1], parse_number(c[2]), parse_number(c[3]), parse_number(c[4]), parse_number(c[5])});
  }
  return out;
}

std::string duration_report(const std::vector<DurationRow>& rows) {
  std::string out = "language\tmethod\trmse_frames\tpearson_r\n";
  for (const auto& r : rows) out += r.language + '\t' + r.method + '\t' + fmt(r.rmse_frames) + '\t' + fmt(r.pearson_r) + '\n';
  return out;
}

std::vector<DurationRow> parse_duration_report(std::string_view text) {
  std::vector<DurationRow> out;
  for (const auto& c : table_rows(text, 4, "language")) out.push_back({c[0], c[1], parse_number(c[2]), parse_number(c[3])});
  return out;
}

}  // namespace a2p::metrics
