#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace detlab {

/// Pairwise (tree) summation with a fixed reduction shape: the split points
/// depend only on the length of the input, so the result is bit-identical
/// no matter how the terms were produced.
template <typename T>
T pairwise_sum(std::span<const T> terms) {
  constexpr std::size_t kLeaf = 8;
  const std::size_t n = terms.size();
  if (n <= kLeaf) {
    T acc{};
    for (const T& x : terms) acc += x;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& terms) {
  return pairwise_sum(std::span<const T>(terms.data(), terms.size()));
}

}  // namespace detlab
