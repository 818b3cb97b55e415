#pragma once

#include "exvi/feature_table.hpp"
#include "exvi/types.hpp"

#include <string>
#include <vector>

namespace exvi {

/// How many principal components to keep.
struct DimensionPolicy {
  enum class Kind { kFixed, kExplainedVariance };
  Kind kind = Kind::kExplainedVariance;
  Index fixed_dim = 0;
  double variance_fraction = 0.95;

  static DimensionPolicy fixed(Index d) {
    return {Kind::kFixed, d, 0.0};
  }
  static DimensionPolicy explained_variance(double f) {
    return {Kind::kExplainedVariance, 0, f};
  }
};

enum class Standardization {
  kZScore,      ///< per-feature zero mean, unit variance
  kCenterOnly,  ///< scale fixed at 1
};

/// Linear map between physical features x and latent coordinates z.
///
/// With s(x) = (x - shift) / scale the standardized features,
/// z = V^T (s(x) - mean) and the inverse map is x = s^-1(mean + V z).
class PcaModel {
 public:
  PcaModel() = default;
  PcaModel(std::vector<std::string> feature_names, Vector shift, Vector scale,
           Vector mean, Matrix components, Vector eigenvalues,
           Vector spectrum);

  Index dim() const { return components_.cols(); }
  Index feature_dim() const { return components_.rows(); }

  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }
  const Vector& shift() const { return shift_; }
  const Vector& scale() const { return scale_; }
  const Vector& mean() const { return mean_; }
  const Matrix& components() const { return components_; }
  const Vector& eigenvalues() const { return eigenvalues_; }
  /// Full covariance spectrum, nonincreasing, length D.
  const Vector& spectrum() const { return spectrum_; }

  /// Fraction of total standardized variance captured by the kept modes.
  double explained_fraction() const;

  Vector standardize(const Vector& x) const;
  Vector unstandardize(const Vector& s) const;

  Vector project(const Vector& x) const;
  Vector reconstruct(const Vector& z) const;

  /// Row-wise versions; rows are samples.
  Matrix project_rows(const Matrix& x) const;
  Matrix reconstruct_rows(const Matrix& z) const;

  /// |v_jk * sqrt(lambda_k)|, D x d.
  Matrix contributions() const;

 private:
  std::vector<std::string> feature_names_;
  Vector shift_;
  Vector scale_;
  Vector mean_;
  Matrix components_;
  Vector eigenvalues_;
  Vector spectrum_;
};

PcaModel fit_pca(const Matrix& x, const DimensionPolicy& policy,
                 Standardization standardization = Standardization::kZScore,
                 std::vector<std::string> feature_names = {});

PcaModel fit_pca(const FeatureTable& table, const DimensionPolicy& policy,
                 Standardization standardization = Standardization::kZScore);

}  // namespace exvi
