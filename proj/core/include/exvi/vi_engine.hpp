#pragma once

#include "exvi/gmm.hpp"
#include "exvi/likelihood.hpp"
#include "exvi/types.hpp"

#include <string>
#include <vector>

namespace exvi {

/// Unnormalized log responsibilities
///   log w_k + log N(z_i | nu_k, L_k) + log P(E | z_i)
///   - log pi_k - log N(z_i | mu_k, S_k)
/// normalized per row with a max-shifted log-sum-exp. Prior and posterior
/// must share K and d. Throws NumericalError naming the first offending row
/// if any term is non-finite.
Matrix responsibilities(const GaussianMixture& prior,
                        const GaussianMixture& posterior, const Matrix& z,
                        const Vector& lik);

struct MStepResult {
  GaussianMixture model;
  std::vector<Index> frozen;  ///< components held at their fallback values
  double effective_n = 0.0;   ///< N_E = sum_i w_i
};

/// Weighted mixture update: pi_k = sum_i w_i r_ik / N_E, mu_k and S_k the
/// (w r)-weighted mean and covariance plus reg_floor on the diagonal. A
/// component whose weighted mass is below 1e-12 keeps the mean and
/// covariance of `fallback` for this step.
MStepResult m_step(const Matrix& z, const Matrix& r, const Vector& w,
                   double reg_floor, const GaussianMixture& fallback);

/// Data expansion of E_Q[log P(E|z)] - KL(Q || P):
///   (1/N_E) sum_i w_i sum_k r_ik [log lik_i + log w_k N_k^prior(z_i)
///                                  - log pi_k N_k^post(z_i) - log r_ik]
/// with r = responsibilities(prior, posterior, z, lik).
double elbo(const GaussianMixture& prior, const GaussianMixture& posterior,
            const Matrix& z, const Vector& lik, const Vector& w);

/// (1/N_E) sum_i w_i [log lik_i + log Q(z_i)]: the bound ascended by the
/// default update. Equals the responsibility expansion with the prior
/// terms dropped, evaluated at the posterior's own responsibilities.
double tilted_objective(const GaussianMixture& posterior, const Matrix& z,
                        const Vector& lik, const Vector& w);

enum class ViUpdate {
  /// E-step from the current posterior, likelihood-weighted M-step.
  /// Coordinate ascent on tilted_objective, so the trace is monotone.
  kWeightedEm,
  /// E-step from the prior/posterior density ratio (responsibilities()),
  /// trace from elbo(). Kept for comparison; it is not an ascent method
  /// and can cycle between component assignments.
  kPriorRatio,
};

struct ViOptions {
  int max_iter = 200;
  double tol = 1e-7;
  double reg_floor = 1e-6;
  ViUpdate update = ViUpdate::kWeightedEm;
};

struct ViResult {
  GaussianMixture posterior;
  std::vector<double> elbo_trace;  ///< entry 0 is the prior itself
  int iterations = 0;
  bool converged = false;
  double effective_n = 0.0;
  int frozen_events = 0;
};

/// Starts from the prior and alternates responsibilities and the weighted
/// M-step until |delta| < tol * max(1, |objective|) or max_iter.
ViResult run_vi(const GaussianMixture& prior, const Matrix& z,
                const LikelihoodProvider& likelihood,
                const ViOptions& options = {});

std::string to_string(ViUpdate u);
ViUpdate vi_update_from_string(const std::string& s);

}  // namespace exvi
