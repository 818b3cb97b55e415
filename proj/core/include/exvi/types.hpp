#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace exvi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// All stochastic routines draw from this engine so that a seed fully
/// determines their output on a given standard library.
using Rng = std::mt19937_64;

/// Floor applied to every exceedance probability before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

/// Derive an independent stream seed from a base seed and a stream id.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace exvi
