#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "a2p/g2p.hpp"
#include "a2p/util.hpp"

namespace a2p::g2p {

namespace {

constexpr std::string_view kMagic = "a2p-g2p-model 1";

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw DataError("g2p model: bad number '" + s + "'");
  return v;
}

}  // namespace

std::size_t G2PModel::HistoryHash::operator()(const std::vector<TokenId>& h) const noexcept {
  std::size_t seed = h.size();
  for (TokenId t : h) {
    seed ^= static_cast<std::size_t>(t) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  }
  return seed;
}

void G2PModel::index_vocabulary() {
  vocab_index_.clear();
  by_letters_.clear();
  max_letters_ = 0;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    vocab_index_.emplace(vocab_[i].key(), id);
    by_letters_[vocab_[i].letters].push_back(id);
    max_letters_ = std::max(max_letters_, vocab_[i].letters.size());
  }
}

G2PModel G2PModel::train(std::span<const GraphoneSequence> corpus, int order,
                         const SmoothingSpec& smoothing, ModelMetadata metadata) {
  if (order < 1 || order > 6) throw ConfigError("g2p order must be in 1..6");
  if (!(smoothing.discount > 0.0 && smoothing.discount < 1.0)) {
    throw ConfigError("g2p discount must be in (0, 1)");
  }
  if (corpus.empty()) throw EmptyCorpus();

  G2PModel m;
  m.order_ = order;
  m.smoothing_ = smoothing;
  m.metadata_ = std::move(metadata);

  // Sorted vocabulary keeps token ids independent of corpus order.
  std::set<Graphone> unique;
  for (const auto& seq : corpus) unique.insert(seq.begin(), seq.end());
  m.vocab_.assign(unique.begin(), unique.end());
  m.index_vocabulary();

  m.levels_.assign(static_cast<std::size_t>(order), {});
  std::vector<TokenId> context;
  for (const auto& seq : corpus) {
    context.assign(1, kBegin);
    for (const auto& g : seq) context.push_back(*m.find(g));
    const std::size_t events = seq.size() + 1;
    for (std::size_t t = 0; t < events; ++t) {
      const TokenId w = t < seq.size() ? context[t + 1] : m.end_token();
      const std::size_t avail = std::min<std::size_t>(static_cast<std::size_t>(order) - 1, t + 1);
      for (std::size_t k = 0; k <= avail; ++k) {
        std::vector<TokenId> h(context.begin() + static_cast<std::ptrdiff_t>(t + 1 - k),
                               context.begin() + static_cast<std::ptrdiff_t>(t + 1));
        auto& stats = m.levels_[k][std::move(h)];
        stats.total += 1.0;
        stats.successors[w] += 1.0;
      }
    }
  }
  return m;
}

std::optional<TokenId> G2PModel::find(const Graphone& g) const {
  auto it = vocab_index_.find(g.key());
  if (it == vocab_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const TokenId> G2PModel::with_letters(std::string_view letters) const {
  auto it = by_letters_.find(std::string(letters));
  if (it == by_letters_.end()) return {};
  return it->second;
}

double G2PModel::prob(std::span<const TokenId> history, TokenId token) const {
  if (token < 0 || token > end_token()) throw DataError("g2p: token cannot be predicted");
  const double d = smoothing_.discount;
  double p = 1.0 / static_cast<double>(event_count());
  const std::size_t avail = std::min<std::size_t>(history.size(), static_cast<std::size_t>(order_) - 1);
  std::vector<TokenId> h;
  h.reserve(avail);
  for (std::size_t k = 0; k <= avail; ++k) {
    h.assign(history.end() - static_cast<std::ptrdiff_t>(k), history.end());
    auto it = levels_[k].find(h);
    // Longer histories extend shorter ones, so the first unseen one ends the chain.
    if (it == levels_[k].end()) break;
    const auto& stats = it->second;
    auto c = stats.successors.find(token);
    double count = c == stats.successors.end() ? 0.0 : c->second;
    double distinct = static_cast<double>(stats.successors.size());
    p = std::max(count - d, 0.0) / stats.total + d * distinct / stats.total * p;
  }
  return p;
}

double G2PModel::log_prob(std::span<const TokenId> history, TokenId token) const {
  return std::log(prob(history, token));
}

double G2PModel::count(std::span<const TokenId> history, TokenId token) const {
  if (history.size() >= levels_.size()) return 0.0;
  auto it = levels_[history.size()].find(std::vector<TokenId>(history.begin(), history.end()));
  if (it == levels_[history.size()].end()) return 0.0;
  auto c = it->second.successors.find(token);
  return c == it->second.successors.end() ? 0.0 : c->second;
}

double G2PModel::history_count(std::span<const TokenId> history) const {
  if (history.size() >= levels_.size()) return 0.0;
  auto it = levels_[history.size()].find(std::vector<TokenId>(history.begin(), history.end()));
  return it == levels_[history.size()].end() ? 0.0 : it->second.total;
}

std::vector<std::vector<TokenId>> G2PModel::histories() const {
  std::vector<std::vector<TokenId>> out;
  for (const auto& level : levels_) {
    std::vector<std::vector<TokenId>> keys;
    for (const auto& [h, stats] : level) keys.push_back(h);
    std::sort(keys.begin(), keys.end());
    out.insert(out.end(), keys.begin(), keys.end());
  }
  return out;
}

std::string G2PModel::serialize() const {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "language\t" << (metadata_.language.empty() ? "-" : metadata_.language) << '\n';
  out << "lexicon_checksum\t" << (metadata_.lexicon_checksum.empty() ? "-" : metadata_.lexicon_checksum)
      << '\n';
  out << "order\t" << order_ << '\n';
  out << "gmax\t" << metadata_.gmax << '\n';
  out << "pmax\t" << metadata_.pmax << '\n';
  out << "discount\t" << format_double(smoothing_.discount) << '\n';
  out << "vocab\t" << vocab_.size() << '\n';
  for (const auto& g : vocab_) {
    out << (g.letters.empty() ? "-" : g.letters) << '\t';
    if (g.phones.empty()) out << '-';
    for (std::size_t i = 0; i < g.phones.size(); ++i) out << (i ? " " : "") << g.phones[i];
    out << '\n';
  }
  std::vector<std::string> lines;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    std::vector<std::pair<std::vector<TokenId>, const HistoryStats*>> sorted;
    for (const auto& [h, stats] : levels_[k]) sorted.emplace_back(h, &stats);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [h, stats] : sorted) {
      std::map<TokenId, double> succ(stats->successors.begin(), stats->successors.end());
      for (const auto& [tok, c] : succ) {
        std::string line = std::to_string(k) + '\t';
        for (std::size_t i = 0; i < h.size(); ++i) line += (i ? " " : "") + std::to_string(h[i]);
        if (h.empty()) line += '-';
        line += '\t' + std::to_string(tok) + '\t' + format_double(c);
        lines.push_back(std::move(line));
      }
    }
  }
  out << "ngrams\t" << lines.size() << '\n';
  for (const auto& l : lines) out << l << '\n';
  out << "end\n";
  return out.str();
}

G2PModel G2PModel::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto next = [&]() -> std::vector<std::string> {
    if (!std::getline(in, line)) throw DataError("g2p model: unexpected end of file");
    return split(line, '\t');
  };
  auto field = [&](std::string_view name) {
    auto f = next();
    if (f.size() != 2 || f[0] != name) throw DataError("g2p model: expected '" + std::string(name) + "'");
    return f[1];
  };
  while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
  }
  if (line != kMagic) throw DataError("g2p model: bad header");
  G2PModel m;
  m.metadata_.language = field("language");
  if (m.metadata_.language == "-") m.metadata_.language.clear();
  m.metadata_.lexicon_checksum = field("lexicon_checksum");
  if (m.metadata_.lexicon_checksum == "-") m.metadata_.lexicon_checksum.clear();
  m.order_ = std::stoi(field("order"));
  if (m.order_ < 1 || m.order_ > 6) throw DataError("g2p model: bad order");
  m.metadata_.gmax = std::stoul(field("gmax"));
  m.metadata_.pmax = std::stoul(field("pmax"));
  m.smoothing_.discount = parse_double(field("discount"));
  const std::size_t v = std::stoul(field("vocab"));
  for (std::size_t i = 0; i < v; ++i) {
    auto f = next();
    if (f.size() != 2) throw DataError("g2p model: bad vocabulary line");
    Graphone g;
    g.letters = f[0] == "-" ? "" : f[0];
    if (f[1] != "-") g.phones = split_whitespace(f[1]);
    m.vocab_.push_back(std::move(g));
  }
  m.index_vocabulary();
  m.levels_.assign(static_cast<std::size_t>(m.order_), {});
  const std::size_t n = std::stoul(field("ngrams"));
  for (std::size_t i = 0; i < n; ++i) {
    auto f = next();
    if (f.size() != 4) throw DataError("g2p model: bad n-gram line");
    std::size_t k = std::stoul(f[0]);
    if (k >= m.levels_.size()) throw DataError("g2p model: history longer than order");
    std::vector<TokenId> h;
    if (f[1] != "-") {
      for (const auto& t : split_whitespace(f[1])) h.push_back(static_cast<TokenId>(std::stoi(t)));
    }
    if (h.size() != k) throw DataError("g2p model: history length mismatch");
    auto tok = static_cast<TokenId>(std::stoi(f[2]));
    double c = parse_double(f[3]);
    auto& stats = m.levels_[k][std::move(h)];
    stats.successors[tok] += c;
    stats.total += c;
  }
  if (!std::getline(in, line) || line != "end") throw DataError("g2p model: missing end marker");
  return m;
}

void G2PModel::save(const std::string& path) const { write_file(path, serialize()); }

G2PModel G2PModel::load(const std::string& path) { return parse(read_file(path)); }

}  // namespace a2p::g2p
