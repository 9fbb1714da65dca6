#include "synthetic_language.hpp"

#include <set>
#include <string_view>

namespace a2p::synth {

namespace {

constexpr std::string_view kVowels = "aeiou";
constexpr std::string_view kLetters = "aeioubcdghklmnprstvy";

bool is_vowel(char c) { return kVowels.find(c) != std::string_view::npos; }

bool matches(Ctx ctx, const std::string& word, std::ptrdiff_t pos) {
  const bool outside = pos < 0 || pos >= static_cast<std::ptrdiff_t>(word.size());
  switch (ctx) {
    case Ctx::any: return true;
    case Ctx::edge: return outside;
    case Ctx::vowel: return !outside && is_vowel(word[static_cast<std::size_t>(pos)]);
    case Ctx::consonant: return !outside && !is_vowel(word[static_cast<std::size_t>(pos)]);
    case Ctx::front_vowel: {
      if (outside) return false;
      char c = word[static_cast<std::size_t>(pos)];
      return c == 'e' || c == 'i';
    }
  }
  return false;
}

std::vector<std::string> one(std::string p) { return {std::move(p)}; }

}  // namespace

SyntheticLanguage::SyntheticLanguage(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Rule> pool = {
      {"kh", Ctx::any, Ctx::any, one("kh")},
      {"th", Ctx::any, Ctx::any, one("th")},
      {"sh", Ctx::any, Ctx::any, one("sh")},
      {"ch", Ctx::any, Ctx::any, one("ch")},
      {"ph", Ctx::any, Ctx::any, one("f")},
      {"aa", Ctx::any, Ctx::any, one("aa")},
      {"ii", Ctx::any, Ctx::any, one("ii")},
      {"ee", Ctx::any, Ctx::any, one("ii")},
      {"oo", Ctx::any, Ctx::any, one("uu")},
      {"c", Ctx::any, Ctx::front_vowel, one("s")},
      {"g", Ctx::any, Ctx::front_vowel, one("j")},
      {"a", Ctx::any, Ctx::edge, one("aa")},
      {"e", Ctx::consonant, Ctx::edge, one("ei")},
      {"n", Ctx::any, Ctx::consonant, one("q")},
      {"s", Ctx::vowel, Ctx::vowel, one("z")},
      {"t", Ctx::vowel, Ctx::vowel, one("d"), 0.9},
      {"h", Ctx::vowel, Ctx::edge, {}},
      {"y", Ctx::edge, Ctx::any, one("i")},
      {"r", Ctx::any, Ctx::consonant, {"r", "a"}},
      {"p", Ctx::any, Ctx::edge, one("b"), 0.85},
      {"o", Ctx::any, Ctx::edge, one("au")},
      {"u", Ctx::consonant, Ctx::vowel, one("w")},
  };
  rng.shuffle(pool);
  pool.resize(30 - kLetters.size());
  // Longer patterns first so digraphs win over their letters.
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Rule& a, const Rule& b) { return a.pattern.size() > b.pattern.size(); });
  rules_ = pool;
  for (char c : kLetters) {
    std::string p(1, c);
    if (c == 'c') p = "k";
    if (c == 'v') p = "w";
    rules_.push_back({std::string(1, c), Ctx::any, Ctx::any, one(p)});
  }
}

std::string SyntheticLanguage::random_word(Rng& rng) const {
  static const std::vector<std::string> onsets = {"b", "c", "d", "g", "h", "k", "l", "m", "n", "p", "r",
                                                  "s", "t", "v", "y", "kh", "th", "sh", "ch", "ph"};
  static const std::vector<std::string> nuclei = {"a", "e", "i", "o", "u", "a", "i", "aa", "ii", "ee", "oo"};
  static const std::vector<std::string> codas = {"", "", "", "n", "r", "s", "h", "t", "p"};
  std::string w;
  const std::size_t syllables = 1 + rng.below(3);
  for (std::size_t s = 0; s < syllables; ++s) {
    if (s > 0 || rng.uniform() < 0.8) w += onsets[rng.below(onsets.size())];
    w += nuclei[rng.below(nuclei.size())];
    w += codas[rng.below(codas.size())];
  }
  return w;
}

std::vector<std::string> SyntheticLanguage::pronounce(const std::string& word, Rng& rng) const {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    bool fired = false;
    for (const auto& r : rules_) {
      if (word.compare(i, r.pattern.size(), r.pattern) != 0) continue;
      const auto pos = static_cast<std::ptrdiff_t>(i);
      if (!matches(r.left, word, pos - 1)) continue;
      if (!matches(r.right, word, pos + static_cast<std::ptrdiff_t>(r.pattern.size()))) continue;
      if (r.prob < 1.0 && rng.uniform() >= r.prob) continue;
      out.insert(out.end(), r.phones.begin(), r.phones.end());
      i += r.pattern.size();
      fired = true;
      break;
    }
    if (!fired) ++i;  // unreachable: every letter has a default rule
  }
  if (out.empty()) out.push_back("a");
  return out;
}

g2p::PronunciationLexicon SyntheticLanguage::lexicon(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  g2p::PronunciationLexicon lex;
  std::set<std::string> seen;
  while (lex.size() < n) {
    auto w = random_word(rng);
    if (!seen.insert(w).second) continue;
    lex.add({w, pronounce(w, rng), g2p::EntrySource::gold});
  }
  return lex;
}

}  // namespace a2p::synth
