#include <gtest/gtest.h>

#include <set>

#include "a2p/error.hpp"
#include "a2p/scriptcore.hpp"
#include "a2p/util.hpp"

using namespace a2p;
using namespace a2p::scriptcore;

namespace {

std::string phones_of(std::string_view text, const ScriptMappingTable& table) {
  std::string out;
  for (const auto& p : to_cps(text, table).phones) out += (out.empty() ? "" : " ") + p;
  return out;
}

}  // namespace

TEST(ToCps, HindiSentenceMatchesCpsRow) {
  auto table = ScriptMappingTable::builtin(Language::hindi);
  auto seq = to_cps("आपके हिंदी पसंद करने पर खुशी हुई", table);
  EXPECT_EQ(seq.joined_words(), "aapakei hiqdii pasaqda karanei para khushii huii");
  EXPECT_EQ(seq.words().size(), 7u);
  EXPECT_EQ(seq.inventory, "cps-v1");
}

TEST(ToCps, EmptyInputGivesEmptySequence) {
  auto table = ScriptMappingTable::builtin(Language::hindi);
  EXPECT_TRUE(to_cps("", table).empty());
  EXPECT_TRUE(to_cps("   ", table).empty());
}

// Single aksharas worked out by hand from the block chart.
TEST(ToCps, SingleAksharas) {
  auto table = ScriptMappingTable::builtin(Language::hindi);
  const std::pair<const char*, const char*> cases[] = {
      {"क", "k a"},     {"कि", "k i"},   {"की", "k ii"},  {"क्", "k"},      {"कं", "k a q"},
      {"का", "k aa"},   {"कु", "k u"},   {"के", "k ei"},  {"ख", "kh a"},   {"कः", "k a hq"},
      {"अ", "a"},       {"ज़", "z a"},  {"कँ", "k a q"},
  };
  for (const auto& [text, expected] : cases) EXPECT_EQ(phones_of(text, table), expected) << text;
}

TEST(ToCps, TamilWordFromLexicon) {
  auto table = ScriptMappingTable::builtin(Language::tamil);
  EXPECT_EQ(phones_of("பிரவேசிக்கவும்", table), "p i r a w ei c i k k a w u m");
  EXPECT_EQ(phones_of("தமிழ்", table), "t a m i zh");
  // Two-part vowel signs, precomposed and decomposed.
  EXPECT_EQ(phones_of("\u0B95\u0BCA", table), "k o");
  EXPECT_EQ(phones_of("\u0B95\u0BC6\u0BBE", table), "k o");
}

TEST(ToCps, Telugu) {
  auto table = ScriptMappingTable::builtin(Language::telugu);
  EXPECT_EQ(phones_of("తెలుగు", table), "t e l u g u");
  EXPECT_EQ(phones_of("కై", table), "k ai");
}

TEST(ToCps, PunctuationAndDigitsDroppedAndCounted) {
  auto table = ScriptMappingTable::builtin(Language::hindi);
  ConversionStats stats;
  auto seq = to_cps("कमल, ४२ जल।", table, &stats);
  EXPECT_EQ(seq.joined_words(), "kamala jala");
  EXPECT_EQ(stats.dropped_punctuation, 2u);
  EXPECT_EQ(stats.dropped_digits, 2u);
}

TEST(ToCps, UnmappedCodepointReportsPosition) {
  auto table = ScriptMappingTable::builtin(Language::hindi);
  try {
    to_cps("कम x", table);
    FAIL() << "expected UnmappedCodepoint";
  } catch (const UnmappedCodepoint& e) {
    EXPECT_EQ(e.codepoint(), U'x');
    EXPECT_EQ(e.position(), 3u);
  }
  // Tamil letters are outside the Devanagari table.
  EXPECT_THROW(to_cps("க", table), UnmappedCodepoint);
}

TEST(ToCps, WordFinalSchwaDeletion) {
  auto retain = ScriptMappingTable::builtin(Language::hindi);
  auto del = retain.with_schwa(SchwaPolicy::word_final_delete);
  EXPECT_EQ(phones_of("कमल", retain), "k a m a l a");
  EXPECT_EQ(phones_of("कमल", del), "k a m a l");
  // A lone consonant keeps its vowel.
  EXPECT_EQ(phones_of("क", del), "k a");
  EXPECT_EQ(phones_of("पर", del), "p a r");
}

TEST(ToCps, Deterministic) {
  auto table = ScriptMappingTable::builtin(Language::telugu);
  const char* text = "రాష్ట్రం తెలుగు";
  EXPECT_EQ(to_cps(text, table), to_cps(text, table));
}

// Any string of mapped codepoints converts, and retain emits at least one
// phone per consonant or vowel letter.
TEST(ToCps, TotalOverMappedText) {
  for (auto lang : {Language::hindi, Language::tamil, Language::telugu}) {
    auto table = ScriptMappingTable::builtin(lang);
    std::vector<char32_t> singles;
    for (const auto& [key, phones] : table.entries()) {
      if (key.size() == 1) singles.push_back(key[0]);
    }
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
      std::u32string text;
      std::size_t letters = 0;
      const std::size_t n = 1 + rng.below(12);
      for (std::size_t i = 0; i < n; ++i) {
        char32_t cp = singles[rng.below(singles.size())];
        auto cls = classify(lang, cp);
        if (cls == CharClass::consonant || cls == CharClass::vowel) ++letters;
        text += cp;
        if (rng.below(5) == 0) text += U' ';
      }
      PhoneSequence seq;
      ASSERT_NO_THROW(seq = to_cps(utf8_encode(text), table)) << utf8_encode(text);
      EXPECT_GE(seq.size(), letters);
      validate(seq, cps_inventory());
    }
  }
}

TEST(MappingTable, RejectsIncompleteCoverage) {
  std::string text = read_file(std::string(A2P_DATA_DIR) + "/hindi.map");
  EXPECT_NO_THROW(ScriptMappingTable::parse(Language::hindi, text));
  auto pos = text.find("U+0915\t");
  ASSERT_NE(pos, std::string::npos);
  std::string missing = text.substr(0, pos) + text.substr(text.find('\n', pos) + 1);
  EXPECT_THROW(ScriptMappingTable::parse(Language::hindi, missing), DataError);
}

TEST(MappingTable, RejectsPhonesOutsideCps) {
  std::string text = read_file(std::string(A2P_DATA_DIR) + "/hindi.map");
  auto pos = text.find("U+0915\tk\t");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "U+0915\tkx\t");
  EXPECT_THROW(ScriptMappingTable::parse(Language::hindi, text), DataError);
}

TEST(MappingTable, ChecksumIsSourceDigest) {
  std::string text = read_file(std::string(A2P_DATA_DIR) + "/tamil.map");
  auto table = ScriptMappingTable::parse(Language::tamil, text);
  EXPECT_EQ(table.checksum(), sha256_hex(text));
  EXPECT_EQ(table.checksum(), ScriptMappingTable::builtin(Language::tamil).checksum());
}

TEST(CpsInventory, ContainsCitedSymbols) {
  const auto& inv = cps_inventory();
  for (const char* s : {"aa", "q", "ei", "sil"}) EXPECT_TRUE(inv.contains(s)) << s;
  for (const char* s : {"p", "i", "r", "a", "w", "ei", "c", "k", "u", "m"}) EXPECT_TRUE(inv.contains(s)) << s;
  std::set<std::string> unique(inv.symbols().begin(), inv.symbols().end());
  EXPECT_EQ(unique.size(), inv.size());
  EXPECT_EQ(inv.kind(), InventoryKind::cps);
  EXPECT_EQ(&cps_inventory(), &inv);
}
