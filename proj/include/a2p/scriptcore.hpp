#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "a2p/phones.hpp"

namespace a2p::scriptcore {

enum class Language { hindi, tamil, telugu };

std::string_view to_string(Language lang);
Language parse_language(std::string_view text);

enum class SchwaPolicy { retain, word_final_delete };

SchwaPolicy parse_schwa_policy(std::string_view text);

/// Structural role of a codepoint inside an Indic Unicode block.
enum class CharClass {
  sign,        // candrabindu, anusvara, visarga and kin
  vowel,       // independent vowel letter
  consonant,   // carries the inherent vowel
  matra,       // dependent vowel sign
  nukta,
  virama,
  avagraha,
  ignorable,   // stress marks and similar; dropped silently
  punctuation, // dropped and counted
  digit,       // dropped and counted
  none,        // unassigned or outside the block
};

/// Classification of `cp` for `lang`. Codepoints outside the language's block
/// return `none`, except the shared dandas which are punctuation everywhere.
CharClass classify(Language lang, char32_t cp);

/// Assigned codepoints of the language block that a mapping table must cover.
std::vector<char32_t> required_codepoints(Language lang);

/// Native-script to CPS mapping for one language.
///
/// Keys are single codepoints or clusters (e.g. consonant + nukta). Values
/// are the phones emitted, empty for silent marks. Consonants map to bare
/// consonant phones; the inherent vowel is supplied by to_cps.
class ScriptMappingTable {
 public:
  ScriptMappingTable(Language language, std::map<std::u32string, std::vector<std::string>> entries,
                     SchwaPolicy schwa = SchwaPolicy::retain, std::string checksum = {});

  /// Parses the table file format:
  ///   `<key><TAB><phone>[+<phone>...]`  with `#` comments; `-` is silent.
  /// A key is literal UTF-8 text or a run of `U+XXXX` codepoints.
  static ScriptMappingTable parse(Language language, std::string_view text,
                                  SchwaPolicy schwa = SchwaPolicy::retain);
  static ScriptMappingTable load(Language language, const std::string& path,
                                 SchwaPolicy schwa = SchwaPolicy::retain);
  /// Table shipped with the library for `language`.
  static ScriptMappingTable builtin(Language language, SchwaPolicy schwa = SchwaPolicy::retain);

  Language language() const { return language_; }
  SchwaPolicy schwa_policy() const { return schwa_; }
  /// SHA-256 of the table source text.
  const std::string& checksum() const { return checksum_; }
  const std::map<std::u32string, std::vector<std::string>>& entries() const { return entries_; }
  std::size_t max_key_length() const { return max_key_; }

  ScriptMappingTable with_schwa(SchwaPolicy schwa) const;

 private:
  Language language_;
  std::map<std::u32string, std::vector<std::string>> entries_;
  SchwaPolicy schwa_;
  std::string checksum_;
  std::size_t max_key_ = 1;
};

struct ConversionStats {
  std::size_t dropped_punctuation = 0;
  std::size_t dropped_digits = 0;
};

/// Converts native-script text to CPS phones, one word per whitespace or
/// punctuation delimited token. No sentence-edge silences are added.
/// Throws UnmappedCodepoint for characters that are neither in the table nor
/// whitespace, punctuation or digits. Position is the codepoint index.
PhoneSequence to_cps(std::string_view native_text, const ScriptMappingTable& table,
                     ConversionStats* stats = nullptr);

/// The fixed CPS inventory, including `sil`.
const PhoneInventory& cps_inventory();

/// The inherent vowel emitted after bare consonants.
inline constexpr std::string_view kInherentVowel = "a";

}  // namespace a2p::scriptcore
