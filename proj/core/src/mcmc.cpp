#include "exvi/mcmc.hpp"

#include "exvi/error.hpp"

#include <string>

namespace exvi {

McmcResult run_mh(const GaussianMixture& prior,
                  const LikelihoodProvider& likelihood,
                  const McmcOptions& options) {
  if (!likelihood.pointwise()) {
    throw ValidationError(
        "MCMC needs a likelihood that can score proposals (surrogate or "
        "function mode)");
  }
  if (options.burn_in < 0 || options.n_steps <= options.burn_in) {
    throw ValidationError("MCMC needs n_steps > burn_in >= 0");
  }
  if (options.thin < 1) throw ValidationError("MCMC thin must be >= 1");
  if (options.warmup_draws < 1) throw ValidationError("MCMC needs warm-up draws");

  Rng rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Vector state = prior.sample_one(rng);
  double state_lik = likelihood.at(state);
  for (Index i = 1; i < options.warmup_draws; ++i) {
    Vector cand = prior.sample_one(rng);
    const double l = likelihood.at(cand);
    if (l > state_lik) {
      state = std::move(cand);
      state_lik = l;
    }
  }
  if (state_lik <= likelihood.floor()) {
    throw Error(ErrorKind::kEmptyEvidence,
                "every warm-up draw sits at the likelihood floor; review the "
                "stress threshold");
  }

  const Index kept = (options.n_steps - options.burn_in + options.thin - 1) /
                     options.thin;
  McmcResult result;
  result.samples.resize(kept, prior.dim());
  result.chain_length = options.n_steps;
  result.seed = options.seed;
  Index row = 0;
  for (Index t = 0; t < options.n_steps; ++t) {
    Vector cand = prior.sample_one(rng);
    const double cand_lik = likelihood.at(cand);
    const double ratio = cand_lik / state_lik;
    const double u = unit(rng);
    ++result.proposed;
    if (ratio >= 1.0 || u < ratio) {
      state = std::move(cand);
      state_lik = cand_lik;
      ++result.accepted;
    }
    if (t >= options.burn_in && (t - options.burn_in) % options.thin == 0) {
      result.samples.row(row++) = state.transpose();
    }
  }
  result.acceptance_rate = static_cast<double>(result.accepted) /
                           static_cast<double>(result.proposed);
  return result;
}

GaussianMixture fit_posterior_gmm(const McmcResult& result, Index k,
                                  const EmOptions& options) {
  if (result.samples.rows() < k) {
    throw Error(ErrorKind::kInsufficientData,
                "MCMC kept " + std::to_string(result.samples.rows()) +
                    " samples, fewer than K = " + std::to_string(k));
  }
  return fit_em(result.samples, k, options).model;
}

}  // namespace exvi
