#include <sstream>

#include "a2p/g2p.hpp"
#include "a2p/scriptcore.hpp"
#include "a2p/util.hpp"

namespace a2p::g2p {

namespace {

std::string entry_key(const LexiconEntry& e) {
  std::string key = e.word;
  for (const auto& p : e.phones) {
    key += ' ';
    key += p;
  }
  return key;
}

}  // namespace

PronunciationLexicon::PronunciationLexicon(const PhoneInventory& inventory) : inventory_(&inventory) {}

bool PronunciationLexicon::add(LexiconEntry entry) {
  if (entry.word.empty()) throw DataError("lexicon: empty word");
  for (char c : entry.word) {
    if (c < 'a' || c > 'z') throw DataError("lexicon: word '" + entry.word + "' is not normalized");
  }
  if (entry.phones.empty()) throw EmptyPronunciation(entry.word);
  const auto& inv = inventory_ ? *inventory_ : scriptcore::cps_inventory();
  for (const auto& p : entry.phones) inv.require(p);
  auto key = entry_key(entry);
  if (keys_.count(key)) return false;
  keys_.emplace(std::move(key), entries_.size());
  entries_.push_back(std::move(entry));
  return true;
}

PronunciationLexicon PronunciationLexicon::parse(std::string_view text) {
  PronunciationLexicon lex;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": expected word<TAB>phones");
    }
    LexiconEntry e;
    e.word = std::string(trim(fields[0]));
    e.phones = split_whitespace(fields[1]);
    if (fields.size() == 3) {
      auto src = trim(fields[2]);
      if (src == "gold") {
        e.source = EntrySource::gold;
      } else if (src != "crowd") {
        throw DataError("lexicon line " + std::to_string(line_no) + ": unknown source");
      }
    }
    lex.add(std::move(e));
  }
  return lex;
}

PronunciationLexicon PronunciationLexicon::load(const std::string& path) {
  return parse(read_file(path));
}

std::string PronunciationLexicon::serialize() const {
  std::string out;
  for (const auto& e : entries_) {
    out += e.word;
    out += '\t';
    for (std::size_t i = 0; i < e.phones.size(); ++i) {
      if (i) out += ' ';
      out += e.phones[i];
    }
    if (e.source == EntrySource::gold) out += "\tgold";
    out += '\n';
  }
  return out;
}

std::string PronunciationLexicon::checksum() const { return sha256_hex(serialize()); }

std::vector<std::string> parse_slash_pronunciation(std::string_view text) {
  std::vector<std::string> out;
  for (auto& part : split(trim(text), '/')) {
    auto p = trim(part);
    if (!p.empty()) out.emplace_back(p);
  }
  return out;
}

PronunciationLexicon build_lexicon(std::span<const std::string> ascii_words,
                                   std::span<const std::vector<std::string>> pronunciations,
                                   EntrySource source) {
  if (ascii_words.size() != pronunciations.size()) {
    throw LengthMismatch(ascii_words.size(), pronunciations.size());
  }
  PronunciationLexicon lex;
  for (std::size_t i = 0; i < ascii_words.size(); ++i) {
    lex.add({ascii_words[i], pronunciations[i], source});
  }
  return lex;
}

std::string Graphone::key() const {
  std::string k = letters;
  k += ':';
  for (std::size_t i = 0; i < phones.size(); ++i) {
    if (i) k += ' ';
    k += phones[i];
  }
  return k;
}

}  // namespace a2p::g2p
