#include <algorithm>
#include <cmath>
#include <map>

#include "a2p/g2p.hpp"

namespace a2p::g2p {

namespace {

struct Hyp {
  std::vector<TokenId> history;  // at most order-1 most recent tokens
  double score = 0.0;
  std::vector<std::string> phones;
  GraphoneSequence path;
};

bool better(const Hyp& a, const Hyp& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.phones < b.phones;
}

// Hypotheses that share a history have identical futures; keep the best.
using Layer = std::map<std::vector<TokenId>, Hyp>;

void offer(Layer& layer, Hyp hyp) {
  auto it = layer.find(hyp.history);
  if (it == layer.end()) {
    auto key = hyp.history;
    layer.emplace(std::move(key), std::move(hyp));
  } else if (better(hyp, it->second)) {
    it->second = std::move(hyp);
  }
}

Hyp extend(const Hyp& from, TokenId token, double logp, const Graphone& g, std::size_t keep) {
  Hyp h;
  h.history = from.history;
  h.history.push_back(token);
  if (h.history.size() > keep) h.history.erase(h.history.begin(), h.history.end() - static_cast<std::ptrdiff_t>(keep));
  h.score = from.score + logp;
  h.phones = from.phones;
  h.phones.insert(h.phones.end(), g.phones.begin(), g.phones.end());
  h.path = from.path;
  h.path.push_back(g);
  return h;
}

std::vector<Hyp> prune(Layer& layer, std::size_t beam) {
  std::vector<Hyp> hyps;
  hyps.reserve(layer.size());
  for (auto& [key, h] : layer) hyps.push_back(std::move(h));
  std::sort(hyps.begin(), hyps.end(), better);
  if (hyps.size() > beam) hyps.resize(beam);
  return hyps;
}

}  // namespace

Transcription transcribe(const G2PModel& model, std::string_view word, const DecodeOptions& options) {
  if (options.beam < 1) throw ConfigError("transcribe: beam must be >= 1");
  if (word.empty()) throw DataError("transcribe: empty word");
  for (char c : word) {
    if (c < 'a' || c > 'z') throw DataError("transcribe: word '" + std::string(word) + "' is not normalized");
  }
  const std::size_t keep = static_cast<std::size_t>(model.order()) - 1;
  const std::size_t L = word.size();
  const double fallback_logp = std::log(options.fallback_prob);
  const auto insertions = model.with_letters("");

  std::vector<Layer> layers(L + 1);
  Hyp start;
  if (keep > 0) start.history.push_back(G2PModel::kBegin);
  offer(layers[0], std::move(start));

  std::vector<Hyp> finals;
  for (std::size_t pos = 0; pos <= L; ++pos) {
    // Letterless graphones may follow any letter-consuming step, once.
    if (!insertions.empty()) {
      std::vector<Hyp> current;
      for (const auto& [key, h] : layers[pos]) {
        if (h.path.empty() || !h.path.back().letters.empty()) current.push_back(h);
      }
      for (const auto& h : current) {
        for (TokenId id : insertions) {
          const auto& g = model.vocabulary()[static_cast<std::size_t>(id)];
          offer(layers[pos], extend(h, id, model.log_prob(h.history, id), g, keep));
        }
      }
    }
    auto hyps = prune(layers[pos], options.beam);
    if (pos == L) {
      finals = std::move(hyps);
      break;
    }
    const bool has_single = !model.with_letters(word.substr(pos, 1)).empty();
    for (const auto& h : hyps) {
      for (std::size_t g = 1; g <= model.max_letters() && pos + g <= L; ++g) {
        for (TokenId id : model.with_letters(word.substr(pos, g))) {
          const auto& gr = model.vocabulary()[static_cast<std::size_t>(id)];
          offer(layers[pos + g], extend(h, id, model.log_prob(h.history, id), gr, keep));
        }
      }
      if (!has_single && options.letter_fallback) {
        Graphone identity{std::string(word.substr(pos, 1)), {std::string(word.substr(pos, 1))}};
        offer(layers[pos + 1], extend(h, G2PModel::kUnknown, fallback_logp, identity, keep));
      }
    }
  }

  if (finals.empty()) throw NoPathFound(std::string(word));
  for (auto& h : finals) h.score += model.log_prob(h.history, model.end_token());
  auto best = std::min_element(finals.begin(), finals.end(), better);
  Transcription out;
  out.phones = std::move(best->phones);
  out.log_prob = best->score;
  out.graphones = std::move(best->path);
  return out;
}

}  // namespace a2p::g2p
