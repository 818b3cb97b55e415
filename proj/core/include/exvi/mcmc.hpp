#pragma once

#include "exvi/gmm.hpp"
#include "exvi/likelihood.hpp"
#include "exvi/types.hpp"

#include <cstdint>

namespace exvi {

struct McmcOptions {
  Index n_steps = 50000;
  Index burn_in = 5000;
  Index thin = 1;
  std::uint64_t seed = 0;
  Index warmup_draws = 100;
};

struct McmcResult {
  Matrix samples;  ///< post burn-in, thinned
  double acceptance_rate = 0.0;
  Index accepted = 0;
  Index proposed = 0;
  Index chain_length = 0;
  std::uint64_t seed = 0;
};

/// Independence Metropolis-Hastings targeting P(z|E) ~ P(E|z) P(z) with the
/// prior as proposal, so a move is accepted with min(1, lik'/lik). The chain
/// starts at the best of `warmup_draws` prior samples.
McmcResult run_mh(const GaussianMixture& prior,
                  const LikelihoodProvider& likelihood,
                  const McmcOptions& options);

/// EM fit with the prior's K on the chain samples.
GaussianMixture fit_posterior_gmm(const McmcResult& result, Index k,
                                  const EmOptions& options = {});

}  // namespace exvi
