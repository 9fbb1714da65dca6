#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace a2p {

inline constexpr std::string_view kSilence = "sil";

/// Token used for word boundaries in text renderings of phone sequences.
/// It never appears in any inventory.
inline constexpr std::string_view kWordBoundary = "|";

enum class InventoryKind { uni, multi, cps };

std::string_view to_string(InventoryKind kind);
InventoryKind parse_inventory_kind(std::string_view text);

/// Named, ordered set of phone symbols.
class PhoneInventory {
 public:
  PhoneInventory(std::string name, InventoryKind kind, std::vector<std::string> symbols);

  const std::string& name() const { return name_; }
  InventoryKind kind() const { return kind_; }
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }

  bool contains(std::string_view symbol) const;
  /// Position of `symbol` in the ordered set, or nullopt.
  std::optional<std::size_t> index_of(std::string_view symbol) const;
  /// Throws UnknownPhone when absent.
  std::size_t require(std::string_view symbol) const;

  /// Symbols of length two; only meaningful for multi inventories.
  std::vector<std::string> bigrams() const;

  /// Parses the inventory file format: `kind: <kind>` header, optional
  /// `name: <name>`, then one symbol per line. `#` starts a comment line.
  static PhoneInventory parse(std::string_view text);
  static PhoneInventory load(const std::string& path);
  std::string serialize() const;

 private:
  std::string name_;
  InventoryKind kind_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Phones of an utterance with word boundaries carried alongside.
///
/// `word_starts` holds, in increasing order, the index of the first phone of
/// every word after the first. Sentence-edge `sil` phones belong to no word.
struct PhoneSequence {
  std::string inventory;
  std::vector<std::string> phones;
  std::vector<std::size_t> word_starts;

  bool empty() const { return phones.empty(); }
  std::size_t size() const { return phones.size(); }

  /// Phones of each word, in order. Leading/trailing `sil` are excluded.
  std::vector<std::vector<std::string>> words() const;

  /// Space-separated phones with `|` between words.
  std::string render() const;
  /// Parses the output of render().
  static PhoneSequence parse(std::string_view line, std::string inventory = {});

  /// Each word's phones concatenated without separator, words joined by one
  /// space (the conventional CPS text rendering).
  std::string joined_words() const;

  bool operator==(const PhoneSequence&) const = default;
};

/// Throws UnknownPhone for the first phone missing from `inventory`.
void validate(const PhoneSequence& seq, const PhoneInventory& inventory);

}  // namespace a2p
