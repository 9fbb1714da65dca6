#pragma once

// Stand-in for forced alignments: plausible per-phone durations for phone
// sequences, so the pipeline can be exercised without audio.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "a2p/neural.hpp"
#include "a2p/phones.hpp"

namespace a2p::synth {

/// Duration records (the alignment TSV) for every (utterance id, phones)
/// pair. Vowels run longer than consonants, silences longest; sub-states
/// are integer frames that add up to the phone exactly.
std::string duration_records(const std::vector<std::pair<std::string, PhoneSequence>>& utterances,
                             const neural::FeatureSpec& spec, std::uint64_t seed);

}  // namespace a2p::synth
