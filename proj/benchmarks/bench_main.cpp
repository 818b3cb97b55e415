#include "exvi/gmm.hpp"
#include "exvi/likelihood.hpp"
#include "exvi/mcmc.hpp"
#include "exvi/vi_engine.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

exvi::GaussianMixture toy_mixture(exvi::Index k, exvi::Index d) {
  exvi::Vector w = exvi::Vector::Constant(k, 1.0 / static_cast<double>(k));
  std::vector<exvi::Vector> means;
  std::vector<exvi::Matrix> covs;
  for (exvi::Index c = 0; c < k; ++c) {
    means.push_back(exvi::Vector::Constant(d, 3.0 * static_cast<double>(c)));
    covs.push_back(exvi::Matrix::Identity(d, d));
  }
  return {w, means, covs};
}

void BM_LogDensityRows(benchmark::State& state) {
  const auto n = state.range(0);
  const auto gmm = toy_mixture(4, 6);
  const exvi::Matrix z = gmm.sample(n, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gmm.log_density_rows(z));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LogDensityRows)->Arg(1000)->Arg(10000);

void BM_FitEm(benchmark::State& state) {
  const auto gmm = toy_mixture(4, 6);
  const exvi::Matrix z = gmm.sample(state.range(0), 5);
  exvi::EmOptions opts;
  opts.n_init = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exvi::fit_em(z, 4, opts).log_likelihood);
  }
}
BENCHMARK(BM_FitEm)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_RunVi(benchmark::State& state) {
  const auto prior = toy_mixture(4, 6);
  const exvi::Matrix z = prior.sample(state.range(0), 7);
  const auto lik = exvi::LikelihoodProvider::function([](const exvi::Vector& x) {
    return 1.0 / (1.0 + std::exp(-(x.sum() - 20.0)));
  });
  for (auto _ : state) {
    benchmark::DoNotOptimize(exvi::run_vi(prior, z, lik).iterations);
  }
}
BENCHMARK(BM_RunVi)->Arg(4000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_Mcmc(benchmark::State& state) {
  const auto prior = toy_mixture(4, 6);
  const auto lik = exvi::LikelihoodProvider::function([](const exvi::Vector& x) {
    return 1.0 / (1.0 + std::exp(-(x.sum() - 20.0)));
  });
  exvi::McmcOptions opts;
  opts.n_steps = state.range(0);
  opts.burn_in = opts.n_steps / 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exvi::run_mh(prior, lik, opts).acceptance_rate);
  }
}
BENCHMARK(BM_Mcmc)->Arg(50000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
