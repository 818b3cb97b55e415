#pragma once

#include "exvi/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace exvi {

enum class TermKind { kLinear, kProduct, kSquare };

/// One monomial of the quadratic stress surrogate.
struct Term {
  TermKind kind = TermKind::kLinear;
  Index a = 0;
  std::optional<Index> b;  ///< second factor; set for product and square

  static Term linear(Index a) { return {TermKind::kLinear, a, std::nullopt}; }
  static Term product(Index a, Index b) { return {TermKind::kProduct, a, b}; }
  static Term square(Index a) { return {TermKind::kSquare, a, a}; }

  double evaluate(const Eigen::Ref<const Vector>& x) const;
};

/// Ordered list of monomials over a D-dimensional feature vector.
struct TermSpec {
  std::vector<Term> terms;
  Index feature_dim = 0;
  /// Optional column names; when present they must have feature_dim entries.
  std::vector<std::string> feature_names;

  Index size() const { return static_cast<Index>(terms.size()); }
  void validate() const;
};

/// sigma(x) = intercept + sum_t beta_t m_t(x)
struct StressModel {
  TermSpec termspec;
  Vector beta;
  double intercept = 0.0;

  void validate() const;
  double evaluate(const Vector& x) const;
  Vector evaluate_rows(const Matrix& x) const;
};

Matrix design_matrix(const TermSpec& termspec, const Matrix& x);

struct StressFitOptions {
  double ridge = 1e-8;
  bool fit_intercept = true;
};

/// Ridge least squares with an unpenalized intercept, solved by
/// column-pivoted QR on the (augmented) centered design.
StressModel fit_stress(const Matrix& x, const Vector& sigma,
                       const TermSpec& termspec,
                       const StressFitOptions& options = {});

std::string to_string(TermKind kind);
TermKind term_kind_from_string(const std::string& s);

}  // namespace exvi
