#pragma once

#include "exvi/gmm.hpp"
#include "exvi/types.hpp"

#include <span>
#include <vector>

namespace exvi {

enum class Label : std::uint8_t { kNormal, kExtreme };

inline constexpr double kDefaultLlrThreshold = 0.5;

struct ClassificationReport {
  Index tp = 0;
  Index fp = 0;
  Index tn = 0;
  Index fn = 0;
  double fnr = 0.0;  ///< fn / (fn + tp), 0 when there are no positives
  double fpr = 0.0;  ///< fp / (fp + tn), 0 when there are no negatives
  double llr_threshold = kDefaultLlrThreshold;
  double stress_threshold = 0.0;

  Index total() const { return tp + fp + tn + fn; }
};

/// log q(z) - log p(z)
double llr(const GaussianMixture& posterior, const GaussianMixture& prior,
           const Vector& z);
Vector llr_rows(const GaussianMixture& posterior, const GaussianMixture& prior,
                const Matrix& z);

/// Extreme iff llr > threshold (ties are normal).
Label classify(double llr_value, double threshold = kDefaultLlrThreshold);
std::vector<Label> classify_all(const Vector& llrs,
                                double threshold = kDefaultLlrThreshold);

ClassificationReport confusion(std::span<const Label> predicted,
                               std::span<const Label> truth);

struct SweepPoint {
  double threshold = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
};

std::vector<SweepPoint> threshold_sweep(const Vector& llrs,
                                        std::span<const Label> truth,
                                        std::span<const double> thresholds);

/// `points` evenly spaced values over [min - 0.1, max + 0.1].
std::vector<double> default_sweep_grid(const Vector& llrs, Index points = 101);

std::vector<Label> labels_from_flags(const std::vector<bool>& flags);

}  // namespace exvi
