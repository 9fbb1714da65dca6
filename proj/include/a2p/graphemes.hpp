#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "a2p/phones.hpp"

namespace a2p::graphemes {

/// Lowercases, drops everything outside [a-z] and whitespace, collapses
/// whitespace runs to one space and trims. Throws NonAsciiInput on bytes
/// >= 128 (position is the byte offset).
std::string normalize_ascii(std::string_view text);

/// a-z plus `sil`: 27 symbols.
const PhoneInventory& uni_inventory();

/// The shipped 44-symbol inventory (27 + 17 bigrams).
const PhoneInventory& default_multi_inventory();

/// The digraphs named as frequent across languages: aspirated stops, long
/// vowels and diphthongs. Always part of the default selection.
std::span<const std::string_view> named_bigrams();

/// Multi inventory of the 27 uni symbols followed by `bigrams`.
PhoneInventory make_multi_inventory(std::vector<std::string> bigrams,
                                    std::string name = "multi-grapheme");

/// Checks the cardinality contract: uni has 27 symbols, multi has 27 + K
/// where every extra symbol is a two-letter bigram and a-z, sil are present.
void check_inventory(const PhoneInventory& inventory);

struct BigramReport {
  std::vector<std::pair<std::string, std::size_t>> ranked;
  /// Total bigram occurrences counted over the corpus.
  std::size_t corpus_tokens = 0;

  std::string to_tsv() const;
};

/// Counts overlapping letter bigrams inside words and returns the top_k by
/// count, ties broken lexicographically. Throws EmptyCorpus.
BigramReport mine_bigrams(std::span<const std::string> corpus, std::size_t top_k);

/// Named bigrams first, then the highest-ranked mined bigrams not already
/// chosen, until `total` bigrams are selected.
PhoneInventory select_multi_inventory(const BigramReport& report, std::size_t total = 17);

/// One phone per letter, `sil` at both sentence edges, word boundaries kept.
PhoneSequence segment_uni(std::string_view normalized);

/// Greedy left-to-right segmentation within each word: a listed bigram is
/// consumed whenever the next two letters form one, otherwise one letter.
PhoneSequence segment_multi(std::string_view normalized, const PhoneInventory& inventory);

}  // namespace a2p::graphemes
