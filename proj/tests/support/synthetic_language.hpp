#pragma once

// A toy language with rule-generated pronunciations, used where a real
// lexicon with a known ground truth is needed. Rules are tried in order at
// each letter position; a rule whose probability draw fails falls through to
// the next one, so some pronunciations are noisy.

#include <cstdint>
#include <string>
#include <vector>

#include "a2p/g2p.hpp"
#include "a2p/util.hpp"

namespace a2p::synth {

enum class Ctx { any, vowel, consonant, edge, front_vowel };

struct Rule {
  std::string pattern;
  Ctx left = Ctx::any;
  Ctx right = Ctx::any;
  std::vector<std::string> phones;
  double prob = 1.0;
};

class SyntheticLanguage {
 public:
  /// 30 rules: one default per letter plus context-dependent ones drawn
  /// from a template pool with `seed`.
  explicit SyntheticLanguage(std::uint64_t seed);

  const std::vector<Rule>& rules() const { return rules_; }
  std::string random_word(Rng& rng) const;
  std::vector<std::string> pronounce(const std::string& word, Rng& rng) const;

  /// `n` distinct words with their sampled pronunciations.
  g2p::PronunciationLexicon lexicon(std::size_t n, std::uint64_t seed) const;

 private:
  std::vector<Rule> rules_;
};

}  // namespace a2p::synth
