#pragma once

#include "exvi/types.hpp"

#include <Eigen/Cholesky>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace exvi {

/// Full-covariance Gaussian mixture. Used for the latent prior, the
/// variational posterior and both baseline densities.
///
/// Construction validates the weights (simplex within 1e-10) and factors
/// every covariance once; evaluation reuses the cached Cholesky factors.
class GaussianMixture {
 public:
  GaussianMixture() = default;
  GaussianMixture(Vector weights, std::vector<Vector> means,
                  std::vector<Matrix> covariances);

  Index components() const { return weights_.size(); }
  Index dim() const { return means_.empty() ? 0 : means_.front().size(); }

  const Vector& weights() const { return weights_; }
  const Vector& mean(Index k) const { return means_.at(static_cast<std::size_t>(k)); }
  const Matrix& covariance(Index k) const {
    return covariances_.at(static_cast<std::size_t>(k));
  }
  const std::vector<Vector>& means() const { return means_; }
  const std::vector<Matrix>& covariances() const { return covariances_; }

  /// log sum_k w_k N(z | mu_k, S_k), max-shifted log-sum-exp.
  double log_density(const Vector& z) const;
  Vector log_density_rows(const Matrix& z) const;

  /// Gaussian log density of component k alone (no weight).
  double component_log_density(Index k, const Vector& z) const;
  /// N x K matrix of component log densities.
  Matrix component_log_densities(const Matrix& z) const;

  /// Draws n rows; bit-identical for a fixed seed.
  Matrix sample(Index n, std::uint64_t seed) const;
  Vector sample_one(Rng& rng) const;

  /// Mixture restricted to the given coordinates (exact marginal).
  GaussianMixture marginal(std::span<const Index> coords) const;

  Vector mixture_mean() const;

 private:
  void check_dim(const Vector& z) const;

  Vector weights_;
  Vector log_weights_;
  std::vector<Vector> means_;
  std::vector<Matrix> covariances_;
  std::vector<Eigen::LLT<Matrix>> factors_;
  std::vector<double> log_norm_;  // -0.5 (d log 2pi + log|S_k|)
};

double log_sum_exp(const Eigen::Ref<const Vector>& v);

/// log_sum_exp of every row.
Vector row_log_sum_exp(const Matrix& m);

struct EmOptions {
  int max_iter = 500;
  double tol = 1e-8;  ///< relative log-likelihood change
  double reg_floor = 1e-6;
  std::uint64_t seed = 0;
  int n_init = 5;
};

struct EmFit {
  GaussianMixture model;
  double log_likelihood = 0.0;
  std::vector<double> log_likelihood_trace;  ///< best restart, per iteration
  int iterations = 0;
  bool converged = false;
  int rescues = 0;  ///< empty-component reseeds in the best restart
};

EmFit fit_em(const Matrix& z, Index k, const EmOptions& options = {});

double total_log_likelihood(const GaussianMixture& model, const Matrix& z);

enum class Criterion { kBic, kAic };

/// (K-1) + K d + K d(d+1)/2
Index parameter_count(Index k, Index d);

double information_criterion(const GaussianMixture& model, const Matrix& z,
                             Criterion which);

struct KScore {
  Index k = 0;
  bool ok = false;
  double log_likelihood = 0.0;
  double bic = 0.0;
  double aic = 0.0;
  std::string message;  ///< failure reason when !ok
};

struct KSelection {
  Index best_k = 0;
  std::vector<KScore> scores;
  GaussianMixture best_model;
};

/// Fits every K in the range and returns the argmin of the criterion,
/// ties broken toward smaller K. K values whose fit throws are recorded
/// with ok = false and skipped.
KSelection select_k(const Matrix& z, std::span<const Index> k_range,
                    Criterion which, const EmOptions& options = {});

std::string to_string(Criterion c);

}  // namespace exvi
