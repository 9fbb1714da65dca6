#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "a2p/metrics.hpp"
#include "a2p/util.hpp"

namespace a2p::metrics {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

MushraSession::MushraSession(std::vector<std::string> systems, std::vector<MushraRow> rows)
    : systems_(std::move(systems)), rows_(std::move(rows)) {
  if (systems_.empty()) throw DataError("MUSHRA session without systems");
  for (const auto& row : rows_) {
    const auto where = row.listener + "/" + row.sentence;
    if (row.scores.size() != systems_.size()) throw DimensionMismatch(systems_.size(), row.scores.size());
    bool has_reference = false;
    for (double s : row.scores) {
      if (!(s >= 0 && s <= 100)) throw DataError("MUSHRA score outside [0, 100] in row " + where);
      has_reference |= s == 100;
    }
    if (!has_reference) warnings_.push_back("row " + where + " has no score of 100");
  }
}

MushraSession MushraSession::parse(std::string_view text) {
  std::vector<std::string> systems;
  std::vector<MushraRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> row_of;
  std::vector<std::vector<bool>> seen;
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 4) throw DataError("MUSHRA line " + std::to_string(lineno) + ": expected 4 fields");
    if (cols[0] == "listener" && cols[3] == "score") continue;
    double score;
    try {
      std::size_t used = 0;
      score = std::stod(cols[3], &used);
      if (used != cols[3].size()) throw std::invalid_argument(cols[3]);
    } catch (const std::logic_error&) {
      throw DataError("MUSHRA line " + std::to_string(lineno) + ": bad score '" + cols[3] + "'");
    }
    auto sys = std::find(systems.begin(), systems.end(), cols[2]);
    if (sys == systems.end()) {
      systems.push_back(cols[2]);
      sys = systems.end() - 1;
      for (auto& r : rows) r.scores.push_back(NAN);
      for (auto& s : seen) s.push_back(false);
    }
    const auto s = static_cast<std::size_t>(sys - systems.begin());
    auto [it, fresh] = row_of.try_emplace({cols[0], cols[1]}, rows.size());
    if (fresh) {
      rows.push_back({cols[0], cols[1], std::vector<double>(systems.size(), NAN)});
      seen.emplace_back(systems.size(), false);
    }
    if (seen[it->second][s]) {
      throw DataError("MUSHRA line " + std::to_string(lineno) + ": duplicate score for " + cols[2]);
    }
    seen[it->second][s] = true;
    rows[it->second].scores[s] = score;
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t s = 0; s < systems.size(); ++s) {
      if (!seen[r][s]) throw DataError("MUSHRA row " + rows[r].listener + "/" + rows[r].sentence + " lacks " + systems[s]);
    }
  }
  if (rows.empty()) throw EmptyCorpus();
  return MushraSession(std::move(systems), std::move(rows));
}

std::size_t MushraSession::index_of(std::string_view system) const {
  auto it = std::find(systems_.begin(), systems_.end(), system);
  if (it == systems_.end()) throw ConfigError("unknown system '" + std::string(system) + "'");
  return static_cast<std::size_t>(it - systems_.begin());
}

std::vector<SystemScore> mushra_mos(const MushraSession& session) {
  std::vector<SystemScore> out;
  const auto& rows = session.rows();
  for (std::size_t s = 0; s < session.systems().size(); ++s) {
    SystemScore score{session.systems()[s], rows.size()};
    for (const auto& r : rows) score.mean += r.scores[s];
    score.mean /= static_cast<double>(rows.size());
    if (rows.size() > 1) {
      double ss = 0;
      for (const auto& r : rows) ss += (r.scores[s] - score.mean) * (r.scores[s] - score.mean);
      score.stddev = std::sqrt(ss / static_cast<double>(rows.size() - 1));
    }
    out.push_back(std::move(score));
  }
  return out;
}

std::vector<double> rank_row(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> ranks(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Positions i+1 .. j share their mean.
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

std::vector<std::vector<double>> mushra_ranks(const MushraSession& session) {
  if (session.systems().size() < 2) throw DataError("ranking needs at least 2 systems");
  std::vector<std::vector<double>> out;
  for (const auto& r : session.rows()) out.push_back(rank_row(r.scores));
  return out;
}

namespace {

template <typename Cmp>
Matrix pairwise_fraction(const MushraSession& session, Cmp cmp, bool diagonal) {
  const auto n = session.systems().size();
  if (n < 2) throw DataError("pairwise statistics need at least 2 systems");
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& r : session.rows()) {
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t x = 0; x < n; ++x) {
        if ((x != y || diagonal) && cmp(r.scores[y], r.scores[x])) m(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) += 1;
      }
    }
  }
  return m / static_cast<double>(session.rows().size());
}

}  // namespace

Matrix preference_matrix(const MushraSession& session) {
  return pairwise_fraction(session, [](double y, double x) { return y > x; }, false);
}

Matrix tie_matrix(const MushraSession& session) {
  return pairwise_fraction(session, [](double y, double x) { return y == x; }, true);
}

std::vector<bool> holm(const std::vector<double>& p, double alpha) {
  const auto m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  std::vector<bool> reject(m, false);
  for (std::size_t k = 0; k < m; ++k) {
    if (p[order[k]] > alpha / static_cast<double>(m - k)) break;
    reject[order[k]] = true;
  }
  return reject;
}

std::vector<bool> bonferroni(const std::vector<double>& p, double alpha) {
  std::vector<bool> reject(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) reject[i] = p[i] <= alpha / static_cast<double>(p.size());
  return reject;
}

PairedTest paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw LengthMismatch(a.size(), b.size());
  const auto n = a.size();
  if (n < 2) throw TooFewObservations(n);
  PairedTest out;
  out.n = n;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  out.mean_diff = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0;
  for (double v : d) ss += (v - out.mean_diff) * (v - out.mean_diff);
  const bool all_equal = std::all_of(d.begin(), d.end(), [&](double v) { return v == d.front(); });
  if (all_equal) {
    out.degenerate = true;
    const double diff = d.front();
    out.mean_diff = diff;
    out.t = diff == 0 ? 0.0 : std::copysign(INFINITY, diff);
    out.p = diff == 0 ? 1.0 : 0.0;
    return out;
  }
  const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  out.t = out.mean_diff / se;
  boost::math::students_t dist(static_cast<double>(n - 1));
  out.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t))));
  return out;
}

std::vector<PairedTest> paired_t_holm(const MushraSession& session,
                                      const std::vector<std::pair<std::string, std::string>>& pairs,
                                      double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
  std::vector<PairedTest> out;
  std::vector<double> p;
  for (const auto& [x, y] : pairs) {
    const auto i = session.index_of(x), j = session.index_of(y);
    std::vector<double> a, b;
    for (const auto& r : session.rows()) {
      a.push_back(r.scores[i]);
      b.push_back(r.scores[j]);
    }
    auto test = paired_t(a, b);
    test.a = x;
    test.b = y;
    p.push_back(test.p);
    out.push_back(std::move(test));
  }
  const auto h = holm(p, alpha), bf = bonferroni(p, alpha);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].significant = h[k];
    out[k].significant_bonferroni = bf[k];
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> all_pairs(const MushraSession& session) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto& s = session.systems();
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) out.emplace_back(s[i], s[j]);
  return out;
}

std::string mos_report(const std::vector<SystemScore>& scores) {
  std::string out = "# stddev uses the N-1 convention\nsystem\tn\tmean\tstddev\n";
  for (const auto& s : scores) out += s.system + '\t' + std::to_string(s.n) + '\t' + fmt(s.mean) + '\t' + fmt(s.stddev) + '\n';
  return out;
}

std::string ranks_report(const MushraSession& session, const std::vector<std::vector<double>>& ranks) {
  std::string out = "listener\tsentence\tsystem\trank\n";
  for (std::size_t r = 0; r < session.rows().size(); ++r) {
    const auto& row = session.rows()[r];
    for (std::size_t s = 0; s < session.systems().size(); ++s) {
      out += row.listener + '\t' + row.sentence + '\t' + session.systems()[s] + '\t' + fmt(ranks[r][s]) + '\n';
    }
  }
  return out;
}

std::string preference_report(const MushraSession& session, const Matrix& preference) {
  std::string out = "# entry (row y, column x): fraction of rows where y was rated above x\ny\\x";
  for (const auto& s : session.systems()) out += '\t' + s;
  out += '\n';
  for (std::size_t y = 0; y < session.systems().size(); ++y) {
    out += session.systems()[y];
    for (std::size_t x = 0; x < session.systems().size(); ++x) {
      out += '\t' + fmt(preference(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)));
    }
    out += '\n';
  }
  return out;
}

std::string ttest_report(const std::vector<PairedTest>& tests, double alpha) {
  std::string out = "# two-sided paired t-tests, Holm step-down at alpha " + fmt(alpha) + "\n";
  out += "a\tb\tn\tmean_diff\tt\tp\tdegenerate\tholm\tbonferroni\n";
  for (const auto& t : tests) {
    out += t.a + '\t' + t.b + '\t' + std::to_string(t.n) + '\t' + fmt(t.mean_diff) + '\t' + fmt(t.t) + '\t' + fmt(t.p) +
           '\t' + (t.degenerate ? "yes" : "no") + '\t' + (t.significant ? "reject" : "keep") + '\t' +
           (t.significant_bonferroni ? "reject" : "keep") + '\n';
  }
  return out;
}

}  // namespace a2p::metrics
