#include "a2p/scriptcore.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <span>
#include <sstream>

#include "a2p/embedded_data.hpp"
#include "a2p/error.hpp"
#include "a2p/util.hpp"

namespace a2p::scriptcore {

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::hindi: return "hindi";
    case Language::tamil: return "tamil";
    case Language::telugu: return "telugu";
  }
  return "?";
}

Language parse_language(std::string_view text) {
  if (text == "hindi") return Language::hindi;
  if (text == "tamil") return Language::tamil;
  if (text == "telugu") return Language::telugu;
  throw ConfigError("unknown language '" + std::string(text) + "' (hindi|tamil|telugu)");
}

SchwaPolicy parse_schwa_policy(std::string_view text) {
  if (text == "retain") return SchwaPolicy::retain;
  if (text == "final-delete" || text == "word_final_delete") return SchwaPolicy::word_final_delete;
  throw ConfigError("unknown schwa policy '" + std::string(text) + "' (retain|final-delete)");
}

namespace {

struct Range {
  char32_t first;
  char32_t last;
  CharClass cls;
};

// Assigned codepoints per block. Everything else in the block is `none`.
constexpr Range kDevanagari[] = {
    {0x0900, 0x0903, CharClass::sign},      {0x0904, 0x0914, CharClass::vowel},
    {0x0915, 0x0939, CharClass::consonant}, {0x093A, 0x093B, CharClass::matra},
    {0x093C, 0x093C, CharClass::nukta},     {0x093D, 0x093D, CharClass::avagraha},
    {0x093E, 0x094C, CharClass::matra},     {0x094D, 0x094D, CharClass::virama},
    {0x094E, 0x094F, CharClass::matra},     {0x0950, 0x0950, CharClass::vowel},
    {0x0951, 0x0954, CharClass::ignorable}, {0x0955, 0x0957, CharClass::matra},
    {0x0958, 0x095F, CharClass::consonant}, {0x0960, 0x0961, CharClass::vowel},
    {0x0962, 0x0963, CharClass::matra},     {0x0964, 0x0965, CharClass::punctuation},
    {0x0966, 0x096F, CharClass::digit},     {0x0970, 0x0970, CharClass::punctuation},
    {0x0971, 0x0971, CharClass::ignorable}, {0x0972, 0x0977, CharClass::vowel},
    {0x0978, 0x097F, CharClass::consonant},
};

constexpr Range kTamil[] = {
    {0x0B82, 0x0B83, CharClass::sign},      {0x0B85, 0x0B8A, CharClass::vowel},
    {0x0B8E, 0x0B90, CharClass::vowel},     {0x0B92, 0x0B94, CharClass::vowel},
    {0x0B95, 0x0B95, CharClass::consonant}, {0x0B99, 0x0B9A, CharClass::consonant},
    {0x0B9C, 0x0B9C, CharClass::consonant}, {0x0B9E, 0x0B9F, CharClass::consonant},
    {0x0BA3, 0x0BA4, CharClass::consonant}, {0x0BA8, 0x0BAA, CharClass::consonant},
    {0x0BAE, 0x0BB9, CharClass::consonant}, {0x0BBE, 0x0BC2, CharClass::matra},
    {0x0BC6, 0x0BC8, CharClass::matra},     {0x0BCA, 0x0BCC, CharClass::matra},
    {0x0BCD, 0x0BCD, CharClass::virama},    {0x0BD0, 0x0BD0, CharClass::vowel},
    {0x0BD7, 0x0BD7, CharClass::matra},     {0x0BE6, 0x0BF2, CharClass::digit},
    {0x0BF3, 0x0BFA, CharClass::punctuation},
};

constexpr Range kTelugu[] = {
    {0x0C00, 0x0C04, CharClass::sign},      {0x0C05, 0x0C0C, CharClass::vowel},
    {0x0C0E, 0x0C10, CharClass::vowel},     {0x0C12, 0x0C14, CharClass::vowel},
    {0x0C15, 0x0C28, CharClass::consonant}, {0x0C2A, 0x0C39, CharClass::consonant},
    {0x0C3C, 0x0C3C, CharClass::nukta},     {0x0C3D, 0x0C3D, CharClass::avagraha},
    {0x0C3E, 0x0C44, CharClass::matra},     {0x0C46, 0x0C48, CharClass::matra},
    {0x0C4A, 0x0C4C, CharClass::matra},     {0x0C4D, 0x0C4D, CharClass::virama},
    {0x0C55, 0x0C56, CharClass::matra},     {0x0C58, 0x0C5A, CharClass::consonant},
    // Nakaara pollu is an explicitly vowelless n: it behaves like a sign.
    {0x0C5D, 0x0C5D, CharClass::sign},      {0x0C60, 0x0C61, CharClass::vowel},
    {0x0C62, 0x0C63, CharClass::matra},     {0x0C66, 0x0C6F, CharClass::digit},
    {0x0C77, 0x0C77, CharClass::punctuation}, {0x0C78, 0x0C7E, CharClass::digit},
    {0x0C7F, 0x0C7F, CharClass::punctuation},
};

std::span<const Range> ranges_for(Language lang) {
  switch (lang) {
    case Language::hindi: return kDevanagari;
    case Language::tamil: return kTamil;
    case Language::telugu: return kTelugu;
  }
  return {};
}

bool is_mapped_class(CharClass c) {
  switch (c) {
    case CharClass::sign:
    case CharClass::vowel:
    case CharClass::consonant:
    case CharClass::matra:
    case CharClass::nukta:
    case CharClass::virama:
    case CharClass::avagraha:
      return true;
    default:
      return false;
  }
}

bool is_whitespace(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f' ||
         cp == 0x00A0 || cp == 0x200B || cp == 0x3000 || (cp >= 0x2000 && cp <= 0x200A);
}

bool is_zero_width_joiner(char32_t cp) { return cp == 0x200C || cp == 0x200D; }

bool is_generic_punctuation(char32_t cp) {
  if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
  return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x00A1 && cp <= 0x00BF);
}

std::vector<std::string> parse_phones(std::string_view field, std::size_t line_no) {
  field = trim(field);
  if (field == "-") return {};
  std::vector<std::string> out;
  for (auto& p : split(field, '+')) {
    auto t = std::string(trim(p));
    bool ok = !t.empty();
    for (char c : t) ok = ok && c >= 'a' && c <= 'z';
    if (!ok) {
      throw DataError("mapping table line " + std::to_string(line_no) + ": bad phone '" + t + "'");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::u32string parse_key(std::string_view field, std::size_t line_no) {
  field = trim(field);
  if (field.starts_with("U+")) {
    std::u32string key;
    std::size_t i = 0;
    while (i < field.size()) {
      if (field.substr(i, 2) != "U+") {
        throw DataError("mapping table line " + std::to_string(line_no) + ": bad key");
      }
      std::size_t j = i + 2;
      while (j < field.size() && std::isxdigit(static_cast<unsigned char>(field[j]))) ++j;
      if (j == i + 2) throw DataError("mapping table line " + std::to_string(line_no) + ": bad key");
      key.push_back(static_cast<char32_t>(std::stoul(std::string(field.substr(i + 2, j - i - 2)), nullptr, 16)));
      i = j;
    }
    return key;
  }
  return utf8_decode(field);
}

}  // namespace

CharClass classify(Language lang, char32_t cp) {
  if (cp == 0x0964 || cp == 0x0965) return CharClass::punctuation;
  for (const auto& r : ranges_for(lang)) {
    if (cp >= r.first && cp <= r.last) return r.cls;
  }
  return CharClass::none;
}

std::vector<char32_t> required_codepoints(Language lang) {
  std::vector<char32_t> out;
  for (const auto& r : ranges_for(lang)) {
    if (!is_mapped_class(r.cls)) continue;
    for (char32_t cp = r.first; cp <= r.last; ++cp) out.push_back(cp);
  }
  return out;
}

ScriptMappingTable::ScriptMappingTable(Language language,
                                       std::map<std::u32string, std::vector<std::string>> entries,
                                       SchwaPolicy schwa, std::string checksum)
    : language_(language), entries_(std::move(entries)), schwa_(schwa), checksum_(std::move(checksum)) {
  const auto& inventory = cps_inventory();
  for (const auto& [key, phones] : entries_) {
    if (key.empty()) throw DataError("mapping table: empty key");
    for (char32_t cp : key) {
      if (!is_mapped_class(classify(language_, cp))) {
        throw DataError("mapping table: key contains U+" + [&] {
          char buf[8];
          std::snprintf(buf, sizeof buf, "%04X", static_cast<unsigned>(cp));
          return std::string(buf);
        }() + " which is not a letter or mark of the " + std::string(to_string(language_)) + " block");
      }
    }
    for (const auto& p : phones) inventory.require(p);
    max_key_ = std::max(max_key_, key.size());
  }
  for (char32_t cp : required_codepoints(language_)) {
    if (!entries_.count(std::u32string(1, cp))) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%04X", static_cast<unsigned>(cp));
      throw DataError("mapping table for " + std::string(to_string(language_)) +
                      " does not cover U+" + buf);
    }
  }
}

ScriptMappingTable ScriptMappingTable::parse(Language language, std::string_view text,
                                             SchwaPolicy schwa) {
  std::map<std::u32string, std::vector<std::string>> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("mapping table line " + std::to_string(line_no) + ": expected <key><TAB><phones>");
    }
    auto key = parse_key(line.substr(0, tab), line_no);
    auto phones = parse_phones(line.substr(tab + 1), line_no);
    if (!entries.emplace(key, std::move(phones)).second) {
      throw DataError("mapping table line " + std::to_string(line_no) + ": duplicate key");
    }
  }
  return ScriptMappingTable(language, std::move(entries), schwa, sha256_hex(text));
}

ScriptMappingTable ScriptMappingTable::load(Language language, const std::string& path,
                                            SchwaPolicy schwa) {
  return parse(language, read_file(path), schwa);
}

ScriptMappingTable ScriptMappingTable::builtin(Language language, SchwaPolicy schwa) {
  switch (language) {
    case Language::hindi: return parse(language, embedded::hindi_map, schwa);
    case Language::tamil: return parse(language, embedded::tamil_map, schwa);
    case Language::telugu: return parse(language, embedded::telugu_map, schwa);
  }
  throw ConfigError("no built-in table");
}

ScriptMappingTable ScriptMappingTable::with_schwa(SchwaPolicy schwa) const {
  ScriptMappingTable copy = *this;
  copy.schwa_ = schwa;
  return copy;
}

namespace {

bool is_vowel_phone(const std::string& p) {
  static const std::vector<std::string> kVowels = {"a", "aa", "i", "ii", "u", "uu", "e",
                                                   "ei", "ai", "o", "oo", "au"};
  return std::find(kVowels.begin(), kVowels.end(), p) != kVowels.end();
}

class WordBuilder {
 public:
  explicit WordBuilder(SchwaPolicy schwa) : schwa_(schwa) {}

  void consonant(const std::vector<std::string>& phones) {
    flush_schwa();
    append(phones);
    pending_ = true;
  }
  void vowel_sign(const std::vector<std::string>& phones) {
    pending_ = false;
    append(phones);
  }
  void kill_vowel() { pending_ = false; }
  void standalone(const std::vector<std::string>& phones) {
    flush_schwa();
    append(phones);
  }

  std::vector<std::string> finish() {
    if (pending_) {
      bool has_vowel = std::any_of(phones_.begin(), phones_.end(), is_vowel_phone);
      // A final schwa is only dropped when the word keeps another vowel.
      if (schwa_ == SchwaPolicy::retain || !has_vowel) phones_.emplace_back(kInherentVowel);
      pending_ = false;
    }
    return std::move(phones_);
  }

 private:
  void flush_schwa() {
    if (pending_) phones_.emplace_back(kInherentVowel);
    pending_ = false;
  }
  void append(const std::vector<std::string>& phones) {
    phones_.insert(phones_.end(), phones.begin(), phones.end());
  }

  SchwaPolicy schwa_;
  bool pending_ = false;
  std::vector<std::string> phones_;
};

}  // namespace

PhoneSequence to_cps(std::string_view native_text, const ScriptMappingTable& table,
                     ConversionStats* stats) {
  ConversionStats local;
  ConversionStats& st = stats ? *stats : local;
  const std::u32string text = utf8_decode(native_text);
  const auto& entries = table.entries();

  PhoneSequence out;
  out.inventory = cps_inventory().name();
  WordBuilder word(table.schwa_policy());
  bool in_word = false;

  auto end_word = [&] {
    if (!in_word) return;
    auto phones = word.finish();
    if (!phones.empty()) {
      if (!out.phones.empty()) out.word_starts.push_back(out.phones.size());
      out.phones.insert(out.phones.end(), phones.begin(), phones.end());
    }
    word = WordBuilder(table.schwa_policy());
    in_word = false;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = text[i];
    if (is_whitespace(cp)) {
      end_word();
      ++i;
      continue;
    }
    if (is_zero_width_joiner(cp)) {
      ++i;
      continue;
    }
    CharClass cls = classify(table.language(), cp);
    if (cls == CharClass::punctuation || (cls == CharClass::none && is_generic_punctuation(cp))) {
      ++st.dropped_punctuation;
      end_word();
      ++i;
      continue;
    }
    if (cls == CharClass::digit || (cp >= '0' && cp <= '9')) {
      ++st.dropped_digits;
      end_word();
      ++i;
      continue;
    }
    if (cls == CharClass::ignorable) {
      ++i;
      continue;
    }
    // Longest key match starting at i.
    const std::vector<std::string>* phones = nullptr;
    std::size_t matched = 0;
    for (std::size_t len = std::min(table.max_key_length(), text.size() - i); len >= 1; --len) {
      auto it = entries.find(text.substr(i, len));
      if (it != entries.end()) {
        phones = &it->second;
        matched = len;
        break;
      }
    }
    if (!phones) throw UnmappedCodepoint(cp, i);
    in_word = true;
    switch (cls) {
      case CharClass::consonant: word.consonant(*phones); break;
      case CharClass::matra: word.vowel_sign(*phones); break;
      case CharClass::virama: word.kill_vowel(); break;
      case CharClass::nukta:
      case CharClass::avagraha:
        break;
      case CharClass::sign:
      case CharClass::vowel:
        word.standalone(*phones);
        break;
      default:
        throw UnmappedCodepoint(cp, i);
    }
    i += matched;
  }
  end_word();
  return out;
}

const PhoneInventory& cps_inventory() {
  static const PhoneInventory inventory = PhoneInventory::parse(embedded::cps_inventory);
  return inventory;
}

}  // namespace a2p::scriptcore
