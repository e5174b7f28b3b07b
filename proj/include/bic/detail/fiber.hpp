#pragma once

#include <cstddef>

#include "bic/core_space.hpp"

namespace bic::detail {

// Calls fn(base) once per k-fiber; the fiber's points sit at
// base + j * space.stride(k) for j in [0, axis(k).size()).
template <class Fn>
void for_each_fiber(const FiniteProductSpace& space, std::size_t k, Fn&& fn) {
  const std::size_t stride = space.stride(k);
  const std::size_t block = stride * space.axis(k).size();
  for (std::size_t outer = 0; outer < space.configuration_count(); outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) fn(outer + inner);
  }
}

// Index of the configuration obtained from `index` by setting coordinate k to y.
inline std::size_t with_coordinate(const FiniteProductSpace& space, std::size_t index,
                                   std::size_t k, std::size_t y) {
  const std::size_t stride = space.stride(k);
  return index - space.coordinate(index, k) * stride + y * stride;
}

}  // namespace bic::detail
