#include "exvi/stress_model.hpp"

#include "exvi/error.hpp"

#include <Eigen/QR>

namespace exvi {

double Term::evaluate(const Eigen::Ref<const Vector>& x) const {
  switch (kind) {
    case TermKind::kLinear:
      return x(a);
    case TermKind::kProduct:
      return x(a) * x(*b);
    case TermKind::kSquare:
      return x(a) * x(a);
  }
  return 0.0;
}

void TermSpec::validate() const {
  if (feature_dim < 1) throw ValidationError("term spec needs feature_dim >= 1");
  if (!feature_names.empty() &&
      static_cast<Index>(feature_names.size()) != feature_dim) {
    throw ValidationError("term spec feature names do not match feature_dim");
  }
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const Term& term = terms[t];
    const auto bad = [&](const std::string& why) {
      return ValidationError("term " + std::to_string(t) + ": " + why);
    };
    if (term.a < 0 || term.a >= feature_dim) throw bad("index a out of range");
    switch (term.kind) {
      case TermKind::kLinear:
        if (term.b) throw bad("linear term takes a single feature");
        break;
      case TermKind::kProduct:
        if (!term.b) throw bad("product term needs two features");
        if (*term.b < 0 || *term.b >= feature_dim) throw bad("index b out of range");
        break;
      case TermKind::kSquare:
        if (term.b && *term.b != term.a) throw bad("square term needs a == b");
        break;
    }
  }
}

void StressModel::validate() const {
  termspec.validate();
  if (beta.size() != termspec.size()) {
    throw ValidationError("stress model has " + std::to_string(beta.size()) +
                          " coefficients for " +
                          std::to_string(termspec.size()) + " terms");
  }
  if (!beta.allFinite() || !std::isfinite(intercept)) {
    throw ValidationError("stress model coefficients must be finite");
  }
}

double StressModel::evaluate(const Vector& x) const {
  if (x.size() != termspec.feature_dim) {
    throw ValidationError("stress model expects " +
                          std::to_string(termspec.feature_dim) +
                          " features, got " + std::to_string(x.size()));
  }
  double sigma = intercept;
  for (Index t = 0; t < termspec.size(); ++t) {
    sigma += beta(t) * termspec.terms[static_cast<std::size_t>(t)].evaluate(x);
  }
  return sigma;
}

Vector StressModel::evaluate_rows(const Matrix& x) const {
  return (design_matrix(termspec, x) * beta).array() + intercept;
}

Matrix design_matrix(const TermSpec& termspec, const Matrix& x) {
  termspec.validate();
  if (x.cols() != termspec.feature_dim) {
    throw ValidationError("design matrix expects " +
                          std::to_string(termspec.feature_dim) +
                          " columns, got " + std::to_string(x.cols()));
  }
  Matrix m(x.rows(), termspec.size());
  for (Index t = 0; t < termspec.size(); ++t) {
    const Term& term = termspec.terms[static_cast<std::size_t>(t)];
    switch (term.kind) {
      case TermKind::kLinear:
        m.col(t) = x.col(term.a);
        break;
      case TermKind::kProduct:
        m.col(t) = x.col(term.a).cwiseProduct(x.col(*term.b));
        break;
      case TermKind::kSquare:
        m.col(t) = x.col(term.a).cwiseAbs2();
        break;
    }
  }
  return m;
}

StressModel fit_stress(const Matrix& x, const Vector& sigma,
                       const TermSpec& termspec,
                       const StressFitOptions& options) {
  if (options.ridge < 0.0) throw ValidationError("ridge must be >= 0");
  if (sigma.size() != x.rows()) {
    throw ValidationError("stress vector length does not match row count");
  }
  if (!x.allFinite() || !sigma.allFinite()) {
    throw ValidationError("stress fit input has non-finite values");
  }
  const Index n = x.rows();
  const Index t = termspec.size();
  if (n <= t && options.ridge == 0.0) {
    throw Error(ErrorKind::kIllConditioned,
                "stress fit needs more rows than terms (" + std::to_string(n) +
                    " <= " + std::to_string(t) + "); use ridge > 0");
  }
  if (n < 1) throw ValidationError("stress fit needs data");

  Matrix m = design_matrix(termspec, x);
  Vector y = sigma;
  Vector col_mean = Vector::Zero(t);
  double y_mean = 0.0;
  if (options.fit_intercept) {
    col_mean = m.colwise().mean();
    y_mean = y.mean();
    m.rowwise() -= col_mean.transpose();
    y.array() -= y_mean;
  }

  Vector beta;
  if (options.ridge > 0.0) {
    Matrix aug(n + t, t);
    aug << m, std::sqrt(options.ridge) * Matrix::Identity(t, t);
    Vector rhs(n + t);
    rhs << y, Vector::Zero(t);
    Eigen::ColPivHouseholderQR<Matrix> qr(aug);
    beta = qr.solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<Matrix> qr(m);
    // relative threshold on the pivots
    qr.setThreshold(1e-10);
    if (qr.rank() < t) {
      throw Error(ErrorKind::kIllConditioned,
                  "stress design matrix is rank deficient (rank " +
                      std::to_string(qr.rank()) + " < " + std::to_string(t) +
                      " terms); use ridge > 0");
    }
    beta = qr.solve(y);
  }
  if (!beta.allFinite()) throw NumericalError("stress fit produced non-finite coefficients");

  StressModel model;
  model.termspec = termspec;
  model.beta = std::move(beta);
  model.intercept = options.fit_intercept ? y_mean - col_mean.dot(model.beta) : 0.0;
  return model;
}

std::string to_string(TermKind kind) {
  switch (kind) {
    case TermKind::kLinear:
      return "linear";
    case TermKind::kProduct:
      return "product";
    case TermKind::kSquare:
      return "square";
  }
  return "linear";
}

TermKind term_kind_from_string(const std::string& s) {
  if (s == "linear") return TermKind::kLinear;
  if (s == "product") return TermKind::kProduct;
  if (s == "square") return TermKind::kSquare;
  throw ValidationError("unknown term kind '" + s + "'");
}

}  // namespace exvi
