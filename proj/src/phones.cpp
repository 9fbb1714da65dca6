#include "a2p/phones.hpp"

#include <cctype>
#include <sstream>

#include "a2p/error.hpp"
#include "a2p/util.hpp"

namespace a2p {

std::string_view to_string(InventoryKind kind) {
  switch (kind) {
    case InventoryKind::uni: return "uni";
    case InventoryKind::multi: return "multi";
    case InventoryKind::cps: return "cps";
  }
  return "?";
}

InventoryKind parse_inventory_kind(std::string_view text) {
  if (text == "uni") return InventoryKind::uni;
  if (text == "multi") return InventoryKind::multi;
  if (text == "cps") return InventoryKind::cps;
  throw DataError("unknown inventory kind '" + std::string(text) + "'");
}

PhoneInventory::PhoneInventory(std::string name, InventoryKind kind,
                               std::vector<std::string> symbols)
    : name_(std::move(name)), kind_(kind), symbols_(std::move(symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const auto& s = symbols_[i];
    if (s.empty() || s == kWordBoundary) throw DataError("invalid phone symbol '" + s + "'");
    if (!index_.emplace(s, i).second) throw DataError("duplicate phone symbol '" + s + "'");
  }
}

bool PhoneInventory::contains(std::string_view symbol) const {
  return index_.count(std::string(symbol)) != 0;
}

std::optional<std::size_t> PhoneInventory::index_of(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t PhoneInventory::require(std::string_view symbol) const {
  auto idx = index_of(symbol);
  if (!idx) throw UnknownPhone(std::string(symbol));
  return *idx;
}

std::vector<std::string> PhoneInventory::bigrams() const {
  std::vector<std::string> out;
  for (const auto& s : symbols_) {
    if (s.size() == 2 && s != kSilence) out.push_back(s);
  }
  return out;
}

PhoneInventory PhoneInventory::parse(std::string_view text) {
  std::optional<InventoryKind> kind;
  std::string name;
  std::vector<std::string> symbols;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.starts_with("kind:")) {
      kind = parse_inventory_kind(trim(line.substr(5)));
    } else if (line.starts_with("name:")) {
      name = std::string(trim(line.substr(5)));
    } else {
      if (!kind) throw DataError("inventory file: symbols before 'kind:' header");
      symbols.emplace_back(line);
    }
  }
  if (!kind) throw DataError("inventory file: missing 'kind:' header");
  if (name.empty()) name = std::string(to_string(*kind));
  return PhoneInventory(std::move(name), *kind, std::move(symbols));
}

PhoneInventory PhoneInventory::load(const std::string& path) { return parse(read_file(path)); }

std::string PhoneInventory::serialize() const {
  std::string out = "kind: " + std::string(to_string(kind_)) + "\nname: " + name_ + "\n";
  for (const auto& s : symbols_) out += s + "\n";
  return out;
}

std::vector<std::vector<std::string>> PhoneSequence::words() const {
  std::vector<std::vector<std::string>> out;
  if (phones.empty()) return out;
  std::size_t begin = 0;
  std::size_t end = phones.size();
  if (phones.front() == kSilence) ++begin;
  if (end > begin && phones.back() == kSilence) --end;
  std::vector<std::size_t> cuts;
  for (auto s : word_starts) {
    if (s > begin && s < end) cuts.push_back(s);
  }
  cuts.push_back(end);
  std::size_t from = begin;
  for (auto cut : cuts) {
    if (cut > from) out.emplace_back(phones.begin() + from, phones.begin() + cut);
    from = cut;
  }
  return out;
}

std::string PhoneSequence::render() const {
  std::string out;
  std::size_t next = 0;
  for (std::size_t i = 0; i < phones.size(); ++i) {
    if (next < word_starts.size() && word_starts[next] == i) {
      out += " ";
      out += kWordBoundary;
      ++next;
    }
    if (!out.empty()) out += ' ';
    out += phones[i];
  }
  return out;
}

PhoneSequence PhoneSequence::parse(std::string_view line, std::string inventory) {
  PhoneSequence seq;
  seq.inventory = std::move(inventory);
  for (auto& tok : split_whitespace(line)) {
    if (tok == kWordBoundary) {
      if (seq.phones.empty()) throw DataError("phone line starts with a word boundary");
      seq.word_starts.push_back(seq.phones.size());
    } else {
      seq.phones.push_back(std::move(tok));
    }
  }
  return seq;
}

std::string PhoneSequence::joined_words() const {
  std::string out;
  for (const auto& word : words()) {
    if (!out.empty()) out += ' ';
    for (const auto& p : word) out += p;
  }
  return out;
}

void validate(const PhoneSequence& seq, const PhoneInventory& inventory) {
  for (const auto& p : seq.phones) inventory.require(p);
}

}  // namespace a2p
