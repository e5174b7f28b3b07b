#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace bic {

using Rng = std::mt19937_64;

/// Independent stream `stream` of the generator family rooted at `seed`. The
/// pair is mixed through std::seed_seq, so neighbouring streams share no state.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Uniform on [0, 1).
double uniform01(Rng& rng);
/// Uniform on [lo, hi).
double uniform(Rng& rng, double lo, double hi);
/// Uniform integer in [lo, hi].
std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi);
/// Index drawn from `weights` (need not be normalized).
std::size_t draw_index(Rng& rng, const std::vector<double>& weights);
/// Symmetric Dirichlet(1) vector of length `size`.
std::vector<double> dirichlet_weights(Rng& rng, std::size_t size);

}  // namespace bic
