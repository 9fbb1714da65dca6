#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace a2p {

struct SplitFractions {
  double train = 0.92;
  double dev = 0.04;
  double test = 0.04;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

/// Shuffles [0, n) with `seed`, then takes floor(n * dev) items for dev,
/// floor(n * test) for test and the remainder for train. Fractions must be
/// non-negative and sum to 1 within 1e-9 (ConfigError otherwise).
SplitIndices split_indices(std::size_t n, const SplitFractions& fractions, std::uint64_t seed);

template <typename T>
struct Split {
  std::vector<T> train;
  std::vector<T> dev;
  std::vector<T> test;
};

template <typename T>
Split<T> apply_split(const std::vector<T>& items, const SplitIndices& idx) {
  Split<T> out;
  for (auto i : idx.train) out.train.push_back(items[i]);
  for (auto i : idx.dev) out.dev.push_back(items[i]);
  for (auto i : idx.test) out.test.push_back(items[i]);
  return out;
}

}  // namespace a2p
