#include "exvi/pca.hpp"

#include "exvi/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace exvi {

namespace {

void check_length(const char* what, Index got, Index want) {
  if (got != want) {
    throw ValidationError(std::string(what) + ": expected length " +
                          std::to_string(want) + ", got " +
                          std::to_string(got));
  }
}

}  // namespace

PcaModel::PcaModel(std::vector<std::string> feature_names, Vector shift,
                   Vector scale, Vector mean, Matrix components,
                   Vector eigenvalues, Vector spectrum)
    : feature_names_(std::move(feature_names)),
      shift_(std::move(shift)),
      scale_(std::move(scale)),
      mean_(std::move(mean)),
      components_(std::move(components)),
      eigenvalues_(std::move(eigenvalues)),
      spectrum_(std::move(spectrum)) {
  const Index D = components_.rows();
  const Index d = components_.cols();
  if (D < 1 || d < 1 || d > D) {
    throw ValidationError("PCA model needs 1 <= d <= D");
  }
  check_length("PCA shift", shift_.size(), D);
  check_length("PCA scale", scale_.size(), D);
  check_length("PCA mean", mean_.size(), D);
  check_length("PCA eigenvalues", eigenvalues_.size(), d);
  if (spectrum_.size() == 0) spectrum_ = eigenvalues_;
  if (feature_names_.empty()) {
    for (Index j = 0; j < D; ++j) {
      feature_names_.push_back("x" + std::to_string(j + 1));
    }
  }
  check_length("PCA feature names", static_cast<Index>(feature_names_.size()),
               D);
  if ((scale_.array() <= 0.0).any()) {
    throw ValidationError("PCA scale entries must be positive");
  }
  for (Index k = 0; k < d; ++k) {
    if (eigenvalues_(k) < 0.0) {
      throw ValidationError("PCA eigenvalues must be nonnegative");
    }
    if (k > 0 && eigenvalues_(k) > eigenvalues_(k - 1)) {
      throw ValidationError("PCA eigenvalues must be nonincreasing");
    }
  }
}

double PcaModel::explained_fraction() const {
  const double total = spectrum_.sum();
  if (total <= 0.0) return 1.0;
  return eigenvalues_.sum() / total;
}

Vector PcaModel::standardize(const Vector& x) const {
  check_length("standardize", x.size(), feature_dim());
  return (x - shift_).cwiseQuotient(scale_);
}

Vector PcaModel::unstandardize(const Vector& s) const {
  check_length("unstandardize", s.size(), feature_dim());
  return s.cwiseProduct(scale_) + shift_;
}

Vector PcaModel::project(const Vector& x) const {
  check_length("project", x.size(), feature_dim());
  if (!x.allFinite()) throw ValidationError("project: non-finite input");
  return components_.transpose() * (standardize(x) - mean_);
}

Vector PcaModel::reconstruct(const Vector& z) const {
  check_length("reconstruct", z.size(), dim());
  if (!z.allFinite()) throw ValidationError("reconstruct: non-finite input");
  return unstandardize(mean_ + components_ * z);
}

Matrix PcaModel::project_rows(const Matrix& x) const {
  check_length("project_rows columns", x.cols(), feature_dim());
  if (!x.allFinite()) throw ValidationError("project_rows: non-finite input");
  Matrix s = (x.rowwise() - shift_.transpose()).array().rowwise() /
             scale_.transpose().array();
  s.rowwise() -= mean_.transpose();
  return s * components_;
}

Matrix PcaModel::reconstruct_rows(const Matrix& z) const {
  check_length("reconstruct_rows columns", z.cols(), dim());
  if (!z.allFinite()) {
    throw ValidationError("reconstruct_rows: non-finite input");
  }
  Matrix s = z * components_.transpose();
  s.rowwise() += mean_.transpose();
  s = s.array().rowwise() * scale_.transpose().array();
  s.rowwise() += shift_.transpose();
  return s;
}

Matrix PcaModel::contributions() const {
  Matrix c = components_;
  for (Index k = 0; k < dim(); ++k) {
    c.col(k) *= std::sqrt(std::max(0.0, eigenvalues_(k)));
  }
  return c.cwiseAbs();
}

PcaModel fit_pca(const Matrix& x, const DimensionPolicy& policy,
                 Standardization standardization,
                 std::vector<std::string> feature_names) {
  const Index n = x.rows();
  const Index D = x.cols();
  if (n < 2) throw ValidationError("PCA needs at least 2 rows");
  if (D < 1) throw ValidationError("PCA needs at least 1 feature");
  if (!x.allFinite()) throw ValidationError("PCA input has non-finite entries");

  const Vector shift = x.colwise().mean();
  Matrix centered = x.rowwise() - shift.transpose();
  Vector scale = Vector::Ones(D);
  const Vector col_var =
      centered.colwise().squaredNorm().transpose() / static_cast<double>(n - 1);
  if (col_var.maxCoeff() <= 0.0) {
    throw Error(ErrorKind::kZeroVariance,
                "PCA input has zero variance in every feature");
  }
  if (standardization == Standardization::kZScore) {
    for (Index j = 0; j < D; ++j) {
      // constant features keep scale 1 and end up as zero columns
      if (col_var(j) > 0.0) scale(j) = std::sqrt(col_var(j));
    }
    centered = centered.array().rowwise() / scale.transpose().array();
  }
  const Vector mean = centered.colwise().mean();  // ~0 after centering
  centered.rowwise() -= mean.transpose();
  const Matrix cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("PCA eigen-decomposition failed");
  }
  // Eigen returns ascending order
  Vector spectrum = solver.eigenvalues().reverse();
  Matrix vectors = solver.eigenvectors().rowwise().reverse();
  for (Index k = 0; k < D; ++k) {
    spectrum(k) = std::max(0.0, spectrum(k));
    Index arg = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, k) < 0.0) vectors.col(k) *= -1.0;
  }

  Index d = 0;
  if (policy.kind == DimensionPolicy::Kind::kFixed) {
    if (policy.fixed_dim < 1 || policy.fixed_dim > D) {
      throw ValidationError("fixed PCA dimension must be in [1, D]");
    }
    d = policy.fixed_dim;
  } else {
    const double f = policy.variance_fraction;
    if (!(f > 0.0 && f <= 1.0)) {
      throw ValidationError("explained-variance fraction must be in (0, 1]");
    }
    const double total = spectrum.sum();
    double cum = 0.0;
    d = D;
    for (Index k = 0; k < D; ++k) {
      cum += spectrum(k);
      // relative slack so that f = 1 keeps exactly the full rank
      if (cum >= f * total * (1.0 - 1e-12)) {
        d = k + 1;
        break;
      }
    }
    if (f >= 1.0) d = D;
  }

  return PcaModel(std::move(feature_names), shift, scale, mean,
                  vectors.leftCols(d), spectrum.head(d), spectrum);
}

PcaModel fit_pca(const FeatureTable& table, const DimensionPolicy& policy,
                 Standardization standardization) {
  table.validate();
  return fit_pca(table.rows, policy, standardization, table.feature_names);
}

}  // namespace exvi
