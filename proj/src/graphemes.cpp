#include "a2p/graphemes.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "a2p/embedded_data.hpp"
#include "a2p/error.hpp"
#include "a2p/util.hpp"

namespace a2p::graphemes {

std::string normalize_ascii(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c >= 128) throw NonAsciiInput(i);
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    char lower = static_cast<char>(std::tolower(c));
    if (lower < 'a' || lower > 'z') continue;
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += lower;
  }
  return out;
}

namespace {

constexpr std::string_view kNamed[] = {"kh", "ch", "th", "ph", "bh", "aa", "ii",
                                       "ee", "oo", "uu", "ai", "au", "ou"};

std::vector<std::string> uni_symbols() {
  std::vector<std::string> s{std::string(kSilence)};
  for (char c = 'a'; c <= 'z'; ++c) s.emplace_back(1, c);
  return s;
}

bool is_letter_pair(const std::string& s) {
  return s.size() == 2 && s[0] >= 'a' && s[0] <= 'z' && s[1] >= 'a' && s[1] <= 'z';
}

// Splits normalized text into words; the precondition guarantees [a-z ].
std::vector<std::string_view> words_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Segmenter>
PhoneSequence segment_with(std::string_view normalized, const std::string& inventory_name,
                           Segmenter&& segment_word) {
  PhoneSequence seq;
  seq.inventory = inventory_name;
  auto words = words_of(normalized);
  if (words.empty()) return seq;
  seq.phones.emplace_back(kSilence);
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w > 0) seq.word_starts.push_back(seq.phones.size());
    segment_word(words[w], seq.phones);
  }
  seq.phones.emplace_back(kSilence);
  return seq;
}

}  // namespace

const PhoneInventory& uni_inventory() {
  static const PhoneInventory inv("uni-grapheme", InventoryKind::uni, uni_symbols());
  return inv;
}

const PhoneInventory& default_multi_inventory() {
  static const PhoneInventory inv = [] {
    auto parsed = PhoneInventory::parse(embedded::multi_inventory);
    check_inventory(parsed);
    return parsed;
  }();
  return inv;
}

std::span<const std::string_view> named_bigrams() { return kNamed; }

PhoneInventory make_multi_inventory(std::vector<std::string> bigrams, std::string name) {
  auto symbols = uni_symbols();
  for (auto& b : bigrams) {
    if (!is_letter_pair(b)) throw DataError("multi inventory: '" + b + "' is not a letter bigram");
    symbols.push_back(std::move(b));
  }
  PhoneInventory inv(std::move(name), InventoryKind::multi, std::move(symbols));
  check_inventory(inv);
  return inv;
}

void check_inventory(const PhoneInventory& inventory) {
  const auto& base = uni_symbols();
  switch (inventory.kind()) {
    case InventoryKind::uni:
      if (inventory.size() != base.size()) {
        throw DataError("uni inventory must have 27 symbols, has " + std::to_string(inventory.size()));
      }
      [[fallthrough]];
    case InventoryKind::multi:
      for (const auto& s : base) {
        if (!inventory.contains(s)) throw DataError("grapheme inventory lacks '" + s + "'");
      }
      for (const auto& s : inventory.symbols()) {
        if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'z') continue;
        if (s == kSilence || is_letter_pair(s)) continue;
        throw DataError("grapheme inventory has invalid symbol '" + s + "'");
      }
      break;
    case InventoryKind::cps:
      break;
  }
}

std::string BigramReport::to_tsv() const {
  std::ostringstream out;
  out << "# corpus_tokens\t" << corpus_tokens << "\n";
  out << "bigram\tcount\n";
  for (const auto& [bigram, count] : ranked) out << bigram << '\t' << count << '\n';
  return out.str();
}

BigramReport mine_bigrams(std::span<const std::string> corpus, std::size_t top_k) {
  if (top_k == 0) throw ConfigError("mine_bigrams: top_k must be >= 1");
  if (corpus.empty()) throw EmptyCorpus();
  std::map<std::string, std::size_t> counts;
  BigramReport report;
  for (const auto& line : corpus) {
    for (auto word : words_of(line)) {
      for (std::size_t i = 0; i + 1 < word.size(); ++i) {
        ++counts[std::string(word.substr(i, 2))];
        ++report.corpus_tokens;
      }
    }
  }
  report.ranked.assign(counts.begin(), counts.end());
  // std::map iteration is lexicographic, so a stable sort keeps that order on ties.
  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (report.ranked.size() > top_k) report.ranked.resize(top_k);
  return report;
}

PhoneInventory select_multi_inventory(const BigramReport& report, std::size_t total) {
  std::vector<std::string> chosen;
  std::set<std::string> seen;
  for (auto b : kNamed) {
    if (chosen.size() == total) break;
    chosen.emplace_back(b);
    seen.emplace(b);
  }
  for (const auto& [bigram, count] : report.ranked) {
    if (chosen.size() == total) break;
    if (seen.insert(bigram).second) chosen.push_back(bigram);
  }
  if (chosen.size() < total) {
    throw DataError("bigram report has too few candidates for " + std::to_string(total) + " bigrams");
  }
  return make_multi_inventory(std::move(chosen));
}

PhoneSequence segment_uni(std::string_view normalized) {
  return segment_with(normalized, uni_inventory().name(),
                      [](std::string_view word, std::vector<std::string>& out) {
                        for (char c : word) out.emplace_back(1, c);
                      });
}

PhoneSequence segment_multi(std::string_view normalized, const PhoneInventory& inventory) {
  if (inventory.kind() != InventoryKind::multi) {
    throw ConfigError("segment_multi requires a multi inventory");
  }
  for (char c = 'a'; c <= 'z'; ++c) {
    if (!inventory.contains(std::string(1, c))) {
      throw DataError(std::string("multi inventory lacks letter '") + c + "'");
    }
  }
  return segment_with(normalized, inventory.name(),
                      [&](std::string_view word, std::vector<std::string>& out) {
                        std::size_t i = 0;
                        while (i < word.size()) {
                          if (i + 1 < word.size() && inventory.contains(word.substr(i, 2))) {
                            out.emplace_back(word.substr(i, 2));
                            i += 2;
                          } else {
                            out.emplace_back(word.substr(i, 1));
                            ++i;
                          }
                        }
                      });
}

}  // namespace a2p::graphemes
