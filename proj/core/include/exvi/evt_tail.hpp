#pragma once

#include "exvi/types.hpp"

#include <span>
#include <string>

namespace exvi {

/// Frechet tail of the surrogate exceedance y = sigma_tilde - sigma_bar.
struct FrechetTail {
  double s = 1.0;      ///< scale, > 0
  double alpha = 1.0;  ///< shape, > 0; smaller is heavier
  double m = 0.0;      ///< location; support is y > m
  double sigma_bar = 0.0;
  double floor = kProbabilityFloor;

  void validate() const;
};

/// Returned for y <= m instead of -inf.
inline constexpr double kLogDensitySentinel = -1e300;

double frechet_log_pdf(const FrechetTail& tail, double y);
double frechet_cdf(const FrechetTail& tail, double y);

/// clamp(F(sigma_tilde - sigma_bar), floor, 1); nondecreasing in sigma_tilde.
double exceedance_prob(const FrechetTail& tail, double sigma_surrogate);

enum class TailLocation { kZero, kProfile };

struct FrechetFit {
  FrechetTail tail;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;  ///< of the mean log-likelihood in (log s, log alpha)
  int iterations = 0;
};

/// Log-likelihood of a sample under (s, alpha, m); -inf outside support.
double frechet_log_likelihood(std::span<const double> ys, double s,
                              double alpha, double m);

/// Maximum likelihood for (s, alpha) by BFGS in log-parameter space with
/// Hill/median initialization. With TailLocation::kProfile the location is
/// chosen by profile likelihood over a grid below min(ys).
FrechetFit fit_frechet_mle(std::span<const double> ys,
                           TailLocation location = TailLocation::kZero);

/// Fits the tail to the positive exceedances of surrogate stresses over
/// sigma_bar and records sigma_bar in the result.
FrechetFit fit_exceedance_tail(std::span<const double> surrogate_stress,
                               double sigma_bar,
                               TailLocation location = TailLocation::kZero);

std::string to_string(TailLocation loc);
TailLocation tail_location_from_string(const std::string& s);

}  // namespace exvi
