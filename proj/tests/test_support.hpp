#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "bregforest/divergence.hpp"
#include "bregforest/types.hpp"

namespace bregforest::fixtures {

inline Dataset normal_dataset(Index n, Index d, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mean, sd);
  Dataset out(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) out(i, j) = static_cast<float>(dist(rng));
  return out;
}

inline Dataset uniform_dataset(Index n, Index d, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Dataset out(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) out(i, j) = static_cast<float>(dist(rng));
  return out;
}

// `blocks` groups of `width` dimensions; each group follows one latent
// standard normal plus independent noise.
inline Dataset block_dataset(Index n, Index blocks, Index width, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Dataset out(n, blocks * width);
  for (Index i = 0; i < n; ++i) {
    for (Index b = 0; b < blocks; ++b) {
      const double z = dist(rng);
      for (Index j = 0; j < width; ++j) out(i, b * width + j) = static_cast<float>(z + noise * dist(rng));
    }
  }
  return out;
}

// Diagonal Mahalanobis weights in [0.5, 2].
inline VectorXd random_weights(Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.5, 2.0);
  VectorXd w(d);
  for (Index i = 0; i < d; ++i) w[i] = dist(rng);
  return w;
}

inline DivergenceSpec spec_for(DivergenceKind kind, Index d, std::uint64_t seed = 17) {
  if (kind == DivergenceKind::kDiagonalMahalanobis) return DivergenceSpec::diagonal_mahalanobis(random_weights(d, seed));
  return DivergenceSpec::from_kind(kind);
}

inline constexpr DivergenceKind kAllKinds[] = {DivergenceKind::kSquaredEuclidean, DivergenceKind::kDiagonalMahalanobis,
                                               DivergenceKind::kItakuraSaito, DivergenceKind::kExponential};

// A coordinate inside the generator's domain, spread over a few decades.
inline double random_coordinate(DivergenceKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  switch (kind) {
    case DivergenceKind::kItakuraSaito:
      return std::exp(3.0 * u(rng));
    case DivergenceKind::kExponential:
      return 4.0 * u(rng);
    default:
      return 5.0 * u(rng);
  }
}

inline VectorXd random_point(DivergenceKind kind, Index d, std::mt19937_64& rng) {
  VectorXd v(d);
  for (Index i = 0; i < d; ++i) v[i] = random_coordinate(kind, rng);
  return v;
}

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace bregforest::fixtures

namespace bregforest::fixtures {

inline std::string kind_label(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::kSquaredEuclidean:
      return "SquaredEuclidean";
    case DivergenceKind::kDiagonalMahalanobis:
      return "Mahalanobis";
    case DivergenceKind::kItakuraSaito:
      return "ItakuraSaito";
    case DivergenceKind::kExponential:
      return "Exponential";
  }
  return "Unknown";
}

}  // namespace bregforest::fixtures
