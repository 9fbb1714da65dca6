#include "a2p/split.hpp"

#include <cmath>
#include <numeric>

#include "a2p/error.hpp"
#include "a2p/util.hpp"

namespace a2p {

SplitIndices split_indices(std::size_t n, const SplitFractions& f, std::uint64_t seed) {
  if (f.train < 0 || f.dev < 0 || f.test < 0 || std::abs(f.train + f.dev + f.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  // The small epsilon keeps products like 100 * 0.04 from flooring to 3.
  auto portion = [n](double frac) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * frac + 1e-9));
  };
  std::size_t n_dev = portion(f.dev);
  std::size_t n_test = portion(f.test);
  SplitIndices out;
  out.dev.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_dev));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_dev),
                  order.begin() + static_cast<std::ptrdiff_t>(n_dev + n_test));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_dev + n_test), order.end());
  return out;
}

}  // namespace a2p
