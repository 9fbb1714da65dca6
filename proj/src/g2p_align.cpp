#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "a2p/g2p.hpp"

namespace a2p::g2p {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

struct Arc {
  std::size_t from;
  std::size_t to;
  std::size_t graphone;
};

// Segmentation lattice of one entry. Node (i, j) has index i * (M + 1) + j,
// which is a topological order because every arc advances i or j.
struct Lattice {
  std::size_t nodes = 0;
  std::vector<Arc> arcs;  // sorted by `from`
};

class GraphoneTable {
 public:
  std::size_t intern(std::string_view letters, std::span<const std::string> phones) {
    std::string key(letters);
    key += '\x1f';
    for (const auto& p : phones) {
      key += p;
      key += ' ';
    }
    auto [it, inserted] = index_.emplace(std::move(key), graphones_.size());
    if (inserted) {
      graphones_.push_back({std::string(letters), {phones.begin(), phones.end()}});
    }
    return it->second;
  }
  const std::vector<Graphone>& graphones() const { return graphones_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Graphone> graphones_;
};

Lattice build_lattice(const LexiconEntry& e, std::size_t gmin, const AlignConfig& cfg,
                      GraphoneTable& table) {
  const std::size_t L = e.word.size();
  const std::size_t M = e.phones.size();
  Lattice lat;
  lat.nodes = (L + 1) * (M + 1);
  for (std::size_t i = 0; i <= L; ++i) {
    for (std::size_t j = 0; j <= M; ++j) {
      for (std::size_t g = gmin; g <= cfg.gmax && i + g <= L; ++g) {
        for (std::size_t p = 0; p <= cfg.pmax && j + p <= M; ++p) {
          if (g == 0 && p == 0) continue;
          auto id = table.intern(std::string_view(e.word).substr(i, g),
                                 std::span(e.phones).subspan(j, p));
          lat.arcs.push_back({i * (M + 1) + j, (i + g) * (M + 1) + (j + p), id});
        }
      }
    }
  }
  return lat;
}

bool reachable(const Lattice& lat) {
  std::vector<char> seen(lat.nodes, 0);
  seen[0] = 1;
  for (const auto& a : lat.arcs) {
    if (seen[a.from]) seen[a.to] = 1;
  }
  return seen[lat.nodes - 1] != 0;
}

// Forward-backward in log space. Adds posterior arc counts to `counts` and
// returns the entry log-likelihood.
double accumulate(const Lattice& lat, const std::vector<double>& logp, std::vector<double>& counts) {
  std::vector<double> alpha(lat.nodes, kNegInf), beta(lat.nodes, kNegInf);
  alpha[0] = 0.0;
  for (const auto& a : lat.arcs) {
    alpha[a.to] = log_add(alpha[a.to], alpha[a.from] + logp[a.graphone]);
  }
  beta[lat.nodes - 1] = 0.0;
  for (auto it = lat.arcs.rbegin(); it != lat.arcs.rend(); ++it) {
    beta[it->from] = log_add(beta[it->from], logp[it->graphone] + beta[it->to]);
  }
  const double total = alpha[lat.nodes - 1];
  if (total == kNegInf) return total;
  for (const auto& a : lat.arcs) {
    double post = alpha[a.from] + logp[a.graphone] + beta[a.to] - total;
    if (post > kNegInf) counts[a.graphone] += std::exp(post);
  }
  return total;
}

double corpus_log_likelihood(const std::vector<Lattice>& lattices, const std::vector<double>& logp,
                             std::vector<double>& counts) {
  std::fill(counts.begin(), counts.end(), 0.0);
  double ll = 0.0;
  for (const auto& lat : lattices) ll += accumulate(lat, logp, counts);
  return ll;
}

GraphoneSequence viterbi(const Lattice& lat, const std::vector<double>& logp,
                         const std::vector<Graphone>& graphones) {
  std::vector<double> best(lat.nodes, kNegInf);
  std::vector<const Arc*> back(lat.nodes, nullptr);
  best[0] = 0.0;
  for (const auto& a : lat.arcs) {
    double s = best[a.from] + logp[a.graphone];
    // Strict comparison: the first arc in lattice order wins ties.
    if (s > best[a.to]) {
      best[a.to] = s;
      back[a.to] = &a;
    }
  }
  GraphoneSequence out;
  for (std::size_t n = lat.nodes - 1; n != 0;) {
    const Arc* a = back[n];
    out.push_back(graphones[a->graphone]);
    n = a->from;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

AlignedCorpus align_lexicon(const PronunciationLexicon& lexicon, const AlignConfig& config) {
  if (config.gmax < 1 || config.pmax < 1) throw ConfigError("align: gmax and pmax must be >= 1");
  if (config.em_iters < 1) throw ConfigError("align: em_iters must be >= 1");
  if (lexicon.empty()) throw EmptyCorpus();

  AlignedCorpus result;
  GraphoneTable table;
  std::vector<Lattice> lattices;
  lattices.reserve(lexicon.size());
  for (const auto& e : lexicon.entries()) {
    auto lat = build_lattice(e, 1, config, table);
    if (!reachable(lat)) {
      if (!config.epsilon_fallback) throw UnalignableEntry(e.word);
      lat = build_lattice(e, 0, config, table);
      ++result.fallback_entries;
    }
    lattices.push_back(std::move(lat));
  }

  const auto& graphones = table.graphones();
  const std::size_t n = graphones.size();
  std::vector<double> logp(n, -std::log(static_cast<double>(n)));
  std::vector<double> counts(n, 0.0);

  for (std::size_t iter = 0; iter < config.em_iters; ++iter) {
    result.log_likelihood.push_back(corpus_log_likelihood(lattices, logp, counts));
    double total = 0.0;
    for (double c : counts) total += c;
    for (std::size_t g = 0; g < n; ++g) {
      logp[g] = counts[g] > 0.0 ? std::log(counts[g] / total) : kNegInf;
    }
  }
  result.log_likelihood.push_back(corpus_log_likelihood(lattices, logp, counts));

  result.sequences.reserve(lattices.size());
  for (const auto& lat : lattices) result.sequences.push_back(viterbi(lat, logp, graphones));
  for (std::size_t g = 0; g < n; ++g) {
    if (logp[g] > kNegInf) result.graphone_probs.emplace_back(graphones[g], std::exp(logp[g]));
  }
  std::sort(result.graphone_probs.begin(), result.graphone_probs.end());
  return result;
}

}  // namespace a2p::g2p
