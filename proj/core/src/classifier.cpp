#include "exvi/classifier.hpp"

#include "exvi/error.hpp"

#include <algorithm>
#include <cmath>

namespace exvi {

double llr(const GaussianMixture& posterior, const GaussianMixture& prior,
           const Vector& z) {
  if (posterior.dim() != prior.dim()) {
    throw ValidationError("LLR densities differ in dimension");
  }
  return posterior.log_density(z) - prior.log_density(z);
}

Vector llr_rows(const GaussianMixture& posterior, const GaussianMixture& prior,
                const Matrix& z) {
  if (posterior.dim() != prior.dim()) {
    throw ValidationError("LLR densities differ in dimension");
  }
  return posterior.log_density_rows(z) - prior.log_density_rows(z);
}

Label classify(double llr_value, double threshold) {
  return llr_value > threshold ? Label::kExtreme : Label::kNormal;
}

std::vector<Label> classify_all(const Vector& llrs, double threshold) {
  std::vector<Label> out(static_cast<std::size_t>(llrs.size()));
  for (Index i = 0; i < llrs.size(); ++i) {
    out[static_cast<std::size_t>(i)] = classify(llrs(i), threshold);
  }
  return out;
}

ClassificationReport confusion(std::span<const Label> predicted,
                               std::span<const Label> truth) {
  if (predicted.size() != truth.size()) {
    throw ValidationError("prediction and truth lengths differ");
  }
  ClassificationReport rep;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == Label::kExtreme;
    const bool t = truth[i] == Label::kExtreme;
    if (p && t) ++rep.tp;
    else if (p && !t) ++rep.fp;
    else if (!p && t) ++rep.fn;
    else ++rep.tn;
  }
  if (rep.fn + rep.tp > 0) {
    rep.fnr = static_cast<double>(rep.fn) / static_cast<double>(rep.fn + rep.tp);
  }
  if (rep.fp + rep.tn > 0) {
    rep.fpr = static_cast<double>(rep.fp) / static_cast<double>(rep.fp + rep.tn);
  }
  return rep;
}

std::vector<SweepPoint> threshold_sweep(const Vector& llrs,
                                        std::span<const Label> truth,
                                        std::span<const double> thresholds) {
  if (static_cast<std::size_t>(llrs.size()) != truth.size()) {
    throw ValidationError("score and truth lengths differ");
  }
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ValidationError("sweep thresholds must be sorted ascending");
  }
  std::vector<SweepPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto pred = classify_all(llrs, t);
    const auto rep = confusion(pred, truth);
    out.push_back({t, rep.fnr, rep.fpr});
  }
  return out;
}

std::vector<double> default_sweep_grid(const Vector& llrs, Index points) {
  if (llrs.size() == 0) throw ValidationError("sweep grid needs scores");
  if (points < 2) throw ValidationError("sweep grid needs at least 2 points");
  const double lo = llrs.minCoeff() - 0.1;
  const double hi = llrs.maxCoeff() + 0.1;
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (Index i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

std::vector<Label> labels_from_flags(const std::vector<bool>& flags) {
  std::vector<Label> out(flags.size());
  for (std::size_t i = 0; i < flags.size(); ++i) {
    out[i] = flags[i] ? Label::kExtreme : Label::kNormal;
  }
  return out;
}

}  // namespace exvi
