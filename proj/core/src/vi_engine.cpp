#include "exvi/vi_engine.hpp"

#include "exvi/error.hpp"

#include <cmath>
#include <limits>

namespace exvi {

namespace {

void check_shapes(const GaussianMixture& prior,
                  const GaussianMixture& posterior, const Matrix& z,
                  const Vector& lik) {
  if (prior.components() != posterior.components()) {
    throw ValidationError("prior and posterior differ in K (" +
                          std::to_string(prior.components()) + " vs " +
                          std::to_string(posterior.components()) + ")");
  }
  if (prior.dim() != posterior.dim() || z.cols() != prior.dim()) {
    throw ValidationError("prior, posterior and data differ in dimension");
  }
  if (lik.size() != z.rows()) {
    throw ValidationError("likelihood vector length does not match data");
  }
}

void check_weights(const Vector& w, Index n) {
  if (w.size() != n) throw ValidationError("weight vector length does not match data");
  if (!w.allFinite() || (w.array() < 0.0).any()) {
    throw ValidationError("sample weights must be finite and nonnegative");
  }
  if (!(w.sum() > 0.0)) throw ValidationError("sample weights sum to zero");
}

// log w_k + log N_k(z_i), N x K
Matrix joint_log(const GaussianMixture& g, const Matrix& z) {
  Matrix out = g.component_log_densities(z);
  out.rowwise() += g.weights().array().log().matrix().transpose();
  return out;
}

Matrix normalize_rows(const Matrix& logr) {
  Matrix r(logr.rows(), logr.cols());
  for (Index i = 0; i < logr.rows(); ++i) {
    const double lse = log_sum_exp(logr.row(i).transpose());
    r.row(i) = (logr.row(i).array() - lse).exp();
  }
  return r;
}

}  // namespace

Matrix responsibilities(const GaussianMixture& prior,
                        const GaussianMixture& posterior, const Matrix& z,
                        const Vector& lik) {
  check_shapes(prior, posterior, z, lik);
  const Matrix prior_log = joint_log(prior, z);
  const Matrix post_log = joint_log(posterior, z);
  Matrix logr = prior_log - post_log;
  for (Index i = 0; i < z.rows(); ++i) {
    if (!(lik(i) > 0.0) || lik(i) > 1.0) {
      throw ValidationError("likelihood of sample " + std::to_string(i) +
                            " is outside (0, 1]");
    }
    logr.row(i).array() += std::log(lik(i));
    const double row_max = logr.row(i).maxCoeff();
    if (std::isnan(logr.row(i).sum()) || !std::isfinite(row_max)) {
      throw NumericalError("non-finite log responsibility at sample " +
                           std::to_string(i));
    }
  }
  return normalize_rows(logr);
}

MStepResult m_step(const Matrix& z, const Matrix& r, const Vector& w,
                   double reg_floor, const GaussianMixture& fallback) {
  const Index n = z.rows();
  const Index d = z.cols();
  const Index k = r.cols();
  if (r.rows() != n) throw ValidationError("responsibility rows do not match data");
  if (fallback.components() != k || fallback.dim() != d) {
    throw ValidationError("fallback mixture does not match K and d");
  }
  check_weights(w, n);
  if (!(reg_floor > 0.0)) throw ValidationError("regularization floor must be positive");

  MStepResult out;
  out.effective_n = w.sum();
  Vector pi(k);
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  const Matrix floor = reg_floor * Matrix::Identity(d, d);
  for (Index c = 0; c < k; ++c) {
    const Vector wr = w.cwiseProduct(r.col(c));
    const double mass = wr.sum();
    pi(c) = mass / out.effective_n;
    if (mass < 1e-12) {
      means.push_back(fallback.mean(c));
      covs.push_back(fallback.covariance(c));
      out.frozen.push_back(c);
      continue;
    }
    Vector mu = z.transpose() * wr / mass;
    const Matrix centered = z.rowwise() - mu.transpose();
    Matrix cov =
        centered.transpose() * (centered.array().colwise() * wr.array()).matrix() /
        mass;
    cov = 0.5 * (cov + cov.transpose()) + floor;
    means.push_back(std::move(mu));
    covs.push_back(std::move(cov));
  }
  // keeps -log pi_k finite in the ratio update
  pi = pi.cwiseMax(1e-300);
  pi /= pi.sum();
  out.model = GaussianMixture(std::move(pi), std::move(means), std::move(covs));
  return out;
}

double elbo(const GaussianMixture& prior, const GaussianMixture& posterior,
            const Matrix& z, const Vector& lik, const Vector& w) {
  check_shapes(prior, posterior, z, lik);
  check_weights(w, z.rows());
  const Matrix r = responsibilities(prior, posterior, z, lik);
  const Matrix diff = joint_log(prior, z) - joint_log(posterior, z);
  double total = 0.0;
  for (Index i = 0; i < z.rows(); ++i) {
    double row = 0.0;
    for (Index c = 0; c < r.cols(); ++c) {
      const double ric = r(i, c);
      if (ric <= 0.0) continue;
      row += ric * (std::log(lik(i)) + diff(i, c) - std::log(ric));
    }
    total += w(i) * row;
  }
  return total / w.sum();
}

double tilted_objective(const GaussianMixture& posterior, const Matrix& z,
                        const Vector& lik, const Vector& w) {
  if (lik.size() != z.rows()) {
    throw ValidationError("likelihood vector length does not match data");
  }
  check_weights(w, z.rows());
  const Vector logq = posterior.log_density_rows(z);
  double total = 0.0;
  for (Index i = 0; i < z.rows(); ++i) {
    if (w(i) == 0.0) continue;
    total += w(i) * (std::log(lik(i)) + logq(i));
  }
  return total / w.sum();
}

ViResult run_vi(const GaussianMixture& prior, const Matrix& z,
                const LikelihoodProvider& likelihood, const ViOptions& options) {
  if (z.cols() != prior.dim()) {
    throw ValidationError("latent data has dimension " +
                          std::to_string(z.cols()) + ", prior has " +
                          std::to_string(prior.dim()));
  }
  if (z.rows() < 1) throw ValidationError("VI needs data");
  if (options.max_iter < 0) throw ValidationError("max_iter must be >= 0");
  if (!z.allFinite()) throw ValidationError("latent data has non-finite rows");

  const Vector lik = likelihood.evaluate(z);
  const Vector w = likelihood.weights(z);
  if (lik.maxCoeff() <= likelihood.floor() || !(w.sum() > 0.0)) {
    throw Error(ErrorKind::kEmptyEvidence,
                "no sample carries extreme-event likelihood above the floor; "
                "review the stress threshold");
  }

  const auto objective = [&](const GaussianMixture& q) {
    return options.update == ViUpdate::kWeightedEm
               ? tilted_objective(q, z, lik, w)
               : elbo(prior, q, z, lik, w);
  };

  ViResult result;
  result.posterior = prior;
  result.effective_n = w.sum();
  double current = objective(prior);
  result.elbo_trace.push_back(current);

  for (int it = 1; it <= options.max_iter; ++it) {
    Matrix r;
    if (options.update == ViUpdate::kWeightedEm) {
      Matrix logr = joint_log(result.posterior, z);
      r = normalize_rows(logr);
    } else {
      r = responsibilities(prior, result.posterior, z, lik);
    }
    MStepResult step = m_step(z, r, w, options.reg_floor, prior);
    if (!step.frozen.empty()) {
      result.frozen_events += static_cast<int>(step.frozen.size());
    }
    result.posterior = std::move(step.model);
    const double next = objective(result.posterior);
    result.elbo_trace.push_back(next);
    result.iterations = it;
    const double delta = std::abs(next - current);
    current = next;
    if (delta < options.tol * std::max(1.0, std::abs(current))) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::string to_string(ViUpdate u) {
  return u == ViUpdate::kWeightedEm ? "weighted-em" : "prior-ratio";
}

ViUpdate vi_update_from_string(const std::string& s) {
  if (s == "weighted-em") return ViUpdate::kWeightedEm;
  if (s == "prior-ratio") return ViUpdate::kPriorRatio;
  throw ValidationError("unknown VI update '" + s + "'");
}

}  // namespace exvi
