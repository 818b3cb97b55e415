#pragma once

#include "exvi/evt_tail.hpp"
#include "exvi/pca.hpp"
#include "exvi/stress_model.hpp"
#include "exvi/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace exvi {

/// Supplies P(E | z_i) and the per-sample weights that carry it into the
/// posterior update.
///
/// * observed:  1 for flagged extremes, the floor otherwise; weights are the
///              0/1 indicators. Only defined on the rows it was built for.
/// * surrogate: Frechet exceedance probability of the stress surrogate at the
///              reconstructed features; weights equal the probabilities.
/// * function:  arbitrary callable, clamped to [floor, 1]; weights equal the
///              probabilities. Mostly for testing samplers.
class LikelihoodProvider {
 public:
  enum class Mode { kObserved, kSurrogate, kFunction };

  static LikelihoodProvider observed(std::vector<bool> extreme,
                                     double floor = kProbabilityFloor);
  static LikelihoodProvider surrogate(std::shared_ptr<const StressModel> stress,
                                      std::shared_ptr<const PcaModel> pca,
                                      FrechetTail tail);
  static LikelihoodProvider function(std::function<double(const Vector&)> fn,
                                     double floor = kProbabilityFloor);

  Mode mode() const { return mode_; }
  double floor() const { return floor_; }

  /// True when the provider can score arbitrary latent points.
  bool pointwise() const { return mode_ != Mode::kObserved; }

  /// Probability for every row of z, in [floor, 1].
  Vector evaluate(const Matrix& z) const;
  /// Probability at one point; throws for the observed mode.
  double at(const Vector& z) const;

  Vector weights(const Matrix& z) const;

  /// Surrogate stress at a latent point (surrogate mode only).
  double surrogate_stress(const Vector& z) const;

 private:
  Mode mode_ = Mode::kObserved;
  double floor_ = kProbabilityFloor;
  std::vector<bool> extreme_;
  std::shared_ptr<const StressModel> stress_;
  std::shared_ptr<const PcaModel> pca_;
  FrechetTail tail_;
  std::function<double(const Vector&)> fn_;
};

std::string to_string(LikelihoodProvider::Mode mode);

}  // namespace exvi
