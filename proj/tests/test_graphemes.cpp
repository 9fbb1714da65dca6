#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "a2p/error.hpp"
#include "a2p/graphemes.hpp"
#include "a2p/util.hpp"
#include "synthetic_language.hpp"

using namespace a2p;
using namespace a2p::graphemes;

namespace {

std::vector<std::string> V(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

// Every segmentation of `word` into letters and listed bigrams; the greedy
// one is the lexicographically largest sequence of piece lengths.
std::vector<std::string> brute_force_greedy(const std::string& word, const std::set<std::string>& bigrams) {
  std::vector<std::vector<std::string>> all;
  std::vector<std::string> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == word.size()) {
      all.push_back(cur);
      return;
    }
    cur.push_back(word.substr(i, 1));
    rec(i + 1);
    cur.pop_back();
    if (i + 2 <= word.size() && bigrams.count(word.substr(i, 2))) {
      cur.push_back(word.substr(i, 2));
      rec(i + 2);
      cur.pop_back();
    }
  };
  rec(0);
  auto lengths = [](const std::vector<std::string>& s) {
    std::vector<std::size_t> l;
    for (const auto& p : s) l.push_back(p.size());
    return l;
  };
  return *std::max_element(all.begin(), all.end(),
                           [&](const auto& a, const auto& b) { return lengths(a) < lengths(b); });
}

std::vector<std::string> strip(const PhoneSequence& seq) {
  std::vector<std::string> out;
  for (const auto& p : seq.phones) {
    if (p != kSilence) out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(NormalizeAscii, Examples) {
  EXPECT_EQ(normalize_ascii("Apke, Hindi!"), "apke hindi");
  EXPECT_EQ(normalize_ascii(""), "");
  EXPECT_EQ(normalize_ascii("prarhambham"), "prarhambham");
  EXPECT_EQ(normalize_ascii("  Mera\t\tNAAM\n  hai...  "), "mera naam hai");
  EXPECT_EQ(normalize_ascii("r2d2 c3po"), "rd cpo");
}

TEST(NormalizeAscii, RejectsNonAscii) {
  try {
    normalize_ascii("abc\xc3\xa9");
    FAIL();
  } catch (const NonAsciiInput& e) {
    EXPECT_EQ(e.position(), 3u);
  }
}

TEST(NormalizeAscii, Idempotent) {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    std::string s;
    for (std::size_t n = rng.below(40); n > 0; --n) s += static_cast<char>(rng.below(128));
    auto once = normalize_ascii(s);
    EXPECT_EQ(normalize_ascii(once), once);
  }
}

TEST(Inventories, Cardinalities) {
  EXPECT_EQ(uni_inventory().size(), 27u);
  EXPECT_EQ(default_multi_inventory().size(), 44u);
  EXPECT_EQ(named_bigrams().size(), 13u);
  for (auto b : named_bigrams()) EXPECT_TRUE(default_multi_inventory().contains(b)) << b;
  EXPECT_NO_THROW(check_inventory(uni_inventory()));
  EXPECT_NO_THROW(check_inventory(default_multi_inventory()));
  auto custom = make_multi_inventory({"kh", "aa"});
  EXPECT_EQ(custom.size(), 29u);
  EXPECT_THROW(make_multi_inventory({"kh", "kh"}), DataError);
  EXPECT_THROW(make_multi_inventory({"khh"}), DataError);
}

TEST(Inventories, ShippedUniFileMatchesBuiltIn) {
  const auto shipped = PhoneInventory::load(std::string(A2P_DATA_DIR) + "/uni_inventory.txt");
  EXPECT_EQ(shipped.symbols(), uni_inventory().symbols());
}

TEST(SegmentUni, Examples) {
  EXPECT_EQ(segment_uni("apke").phones, V({"sil", "a", "p", "k", "e", "sil"}));
  EXPECT_EQ(segment_uni("a").phones, V({"sil", "a", "sil"}));
  EXPECT_EQ(segment_uni("ledu").phones, V({"sil", "l", "e", "d", "u", "sil"}));
  EXPECT_TRUE(segment_uni("").empty());
  auto two = segment_uni("ab cd");
  EXPECT_EQ(two.words(), (std::vector<std::vector<std::string>>{V({"a", "b"}), V({"c", "d"})}));
  EXPECT_EQ(two.render(), "sil a b | c d sil");
}

TEST(SegmentMulti, Examples) {
  auto inv = make_multi_inventory({"kh", "ii", "uu", "aa"});
  EXPECT_EQ(segment_multi("khushii", inv).phones, V({"sil", "kh", "u", "s", "h", "ii", "sil"}));
  EXPECT_EQ(segment_multi("apke", inv).phones, segment_uni("apke").phones);
  EXPECT_EQ(segment_multi("aaa", make_multi_inventory({"aa"})).phones, V({"sil", "aa", "a", "sil"}));
}

TEST(SegmentMulti, MatchesBruteForceGreedy) {
  synth::SyntheticLanguage lang(5);
  Rng rng(9);
  const auto& inv = default_multi_inventory();
  auto bg = inv.bigrams();
  std::set<std::string> bigrams(bg.begin(), bg.end());
  for (int t = 0; t < 300; ++t) {
    auto word = lang.random_word(rng);
    auto seq = segment_multi(word, inv);
    EXPECT_EQ(strip(seq), brute_force_greedy(word, bigrams)) << word;
  }
}

// Both segmenters are lossless and closed over their inventories.
TEST(Segmenters, CoverageAndClosure) {
  synth::SyntheticLanguage lang(5);
  Rng rng(10);
  for (int t = 0; t < 200; ++t) {
    std::string text = lang.random_word(rng);
    for (std::size_t n = rng.below(4); n > 0; --n) text += " " + lang.random_word(rng);
    std::string letters;
    for (char c : text) {
      if (c != ' ') letters += c;
    }
    for (const auto& seq : {segment_uni(text), segment_multi(text, default_multi_inventory())}) {
      std::string joined;
      for (const auto& p : strip(seq)) joined += p;
      EXPECT_EQ(joined, letters);
      EXPECT_EQ(seq.words().size(), split_whitespace(text).size());
    }
    validate(segment_uni(text), uni_inventory());
    validate(segment_multi(text, default_multi_inventory()), default_multi_inventory());
  }
}

TEST(MineBigrams, Examples) {
  std::vector<std::string> aaa{"aaa"};
  auto r = mine_bigrams(aaa, 1);
  ASSERT_EQ(r.ranked.size(), 1u);
  EXPECT_EQ(r.ranked[0], std::make_pair(std::string("aa"), std::size_t{2}));

  std::vector<std::string> abba{"ab ba"};
  r = mine_bigrams(abba, 2);
  ASSERT_EQ(r.ranked.size(), 2u);
  EXPECT_EQ(r.ranked[0].first, "ab");
  EXPECT_EQ(r.ranked[1].first, "ba");

  EXPECT_THROW(mine_bigrams(std::vector<std::string>{}, 5), EmptyCorpus);
}

TEST(MineBigrams, TotalIsSumOfWordLengthsMinusOne) {
  synth::SyntheticLanguage lang(2);
  Rng rng(4);
  std::vector<std::string> corpus;
  std::size_t expected = 0;
  for (int s = 0; s < 50; ++s) {
    std::string line;
    for (std::size_t n = 1 + rng.below(6); n > 0; --n) {
      auto w = lang.random_word(rng);
      expected += w.size() - 1;
      line += (line.empty() ? "" : " ") + w;
    }
    corpus.push_back(line);
  }
  auto r = mine_bigrams(corpus, 1000);
  EXPECT_EQ(r.corpus_tokens, expected);
  std::size_t sum = 0;
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    sum += r.ranked[i].second;
    if (i > 0) {
      const auto& [pb, pc] = r.ranked[i - 1];
      const auto& [b, c] = r.ranked[i];
      EXPECT_TRUE(pc > c || (pc == c && pb < b));
    }
  }
  EXPECT_EQ(sum, expected);
}

// Long vowels and aspirates dominate a transliterated corpus.
TEST(MineBigrams, TransliteratedCorpusSurfacesDigraphs) {
  synth::SyntheticLanguage lang(2);
  Rng rng(21);
  std::vector<std::string> corpus;
  std::size_t words = 0;
  while (words < 10000) {
    std::string line;
    for (int k = 0; k < 10; ++k, ++words) line += (k ? " " : "") + lang.random_word(rng);
    corpus.push_back(line);
  }
  auto r = mine_bigrams(corpus, 50);
  std::set<std::string> top;
  for (const auto& [b, c] : r.ranked) top.insert(b);
  for (const char* b : {"aa", "ii", "kh", "ch", "th"}) EXPECT_TRUE(top.count(b)) << b;

  auto inv = select_multi_inventory(r);
  EXPECT_EQ(inv.size(), 44u);
  EXPECT_NO_THROW(check_inventory(inv));
}
