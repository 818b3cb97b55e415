#include "exvi/likelihood.hpp"

#include "exvi/error.hpp"

#include <algorithm>

namespace exvi {

LikelihoodProvider LikelihoodProvider::observed(std::vector<bool> extreme,
                                                double floor) {
  if (!(floor > 0.0 && floor < 1.0)) {
    throw ValidationError("probability floor must be in (0, 1)");
  }
  LikelihoodProvider p;
  p.mode_ = Mode::kObserved;
  p.floor_ = floor;
  p.extreme_ = std::move(extreme);
  return p;
}

LikelihoodProvider LikelihoodProvider::surrogate(
    std::shared_ptr<const StressModel> stress,
    std::shared_ptr<const PcaModel> pca, FrechetTail tail) {
  if (!stress || !pca) {
    throw ValidationError("surrogate likelihood needs a stress model and PCA");
  }
  stress->validate();
  tail.validate();
  if (stress->termspec.feature_dim != pca->feature_dim()) {
    throw ValidationError("stress model and PCA disagree on feature count");
  }
  LikelihoodProvider p;
  p.mode_ = Mode::kSurrogate;
  p.floor_ = tail.floor;
  p.stress_ = std::move(stress);
  p.pca_ = std::move(pca);
  p.tail_ = tail;
  return p;
}

LikelihoodProvider LikelihoodProvider::function(
    std::function<double(const Vector&)> fn, double floor) {
  if (!fn) throw ValidationError("likelihood function is empty");
  if (!(floor > 0.0 && floor < 1.0)) {
    throw ValidationError("probability floor must be in (0, 1)");
  }
  LikelihoodProvider p;
  p.mode_ = Mode::kFunction;
  p.floor_ = floor;
  p.fn_ = std::move(fn);
  return p;
}

double LikelihoodProvider::surrogate_stress(const Vector& z) const {
  if (mode_ != Mode::kSurrogate) {
    throw ValidationError("surrogate stress needs the surrogate likelihood");
  }
  return stress_->evaluate(pca_->reconstruct(z));
}

double LikelihoodProvider::at(const Vector& z) const {
  switch (mode_) {
    case Mode::kObserved:
      throw ValidationError(
          "the observed likelihood is only defined on its own rows and cannot "
          "score new latent points");
    case Mode::kSurrogate:
      return exceedance_prob(tail_, surrogate_stress(z));
    case Mode::kFunction:
      return std::clamp(fn_(z), floor_, 1.0);
  }
  return floor_;
}

Vector LikelihoodProvider::evaluate(const Matrix& z) const {
  Vector out(z.rows());
  switch (mode_) {
    case Mode::kObserved:
      if (static_cast<Index>(extreme_.size()) != z.rows()) {
        throw ValidationError("observed likelihood has " +
                              std::to_string(extreme_.size()) +
                              " indicators for " + std::to_string(z.rows()) +
                              " rows");
      }
      for (Index i = 0; i < z.rows(); ++i) {
        out(i) = extreme_[static_cast<std::size_t>(i)] ? 1.0 : floor_;
      }
      break;
    case Mode::kSurrogate: {
      const Vector sigma = stress_->evaluate_rows(pca_->reconstruct_rows(z));
      for (Index i = 0; i < z.rows(); ++i) {
        out(i) = exceedance_prob(tail_, sigma(i));
      }
      break;
    }
    case Mode::kFunction:
      for (Index i = 0; i < z.rows(); ++i) out(i) = at(z.row(i).transpose());
      break;
  }
  return out;
}

Vector LikelihoodProvider::weights(const Matrix& z) const {
  if (mode_ == Mode::kObserved) {
    Vector w = evaluate(z);
    return (w.array() >= 1.0).cast<double>().matrix();
  }
  return evaluate(z);
}

std::string to_string(LikelihoodProvider::Mode mode) {
  switch (mode) {
    case LikelihoodProvider::Mode::kObserved:
      return "observed";
    case LikelihoodProvider::Mode::kSurrogate:
      return "surrogate";
    case LikelihoodProvider::Mode::kFunction:
      return "function";
  }
  return "observed";
}

}  // namespace exvi
