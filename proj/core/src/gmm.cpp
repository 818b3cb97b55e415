#include "exvi/gmm.hpp"

#include "exvi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace exvi {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix biased_covariance(const Matrix& z, const Vector& mean) {
  const Matrix c = z.rowwise() - mean.transpose();
  return symmetrized(c.transpose() * c / static_cast<double>(z.rows()));
}

// k-means++ seeding: first center uniform, the rest by squared distance
std::vector<Vector> seed_means(const Matrix& z, Index k, Rng& rng) {
  const Index n = z.rows();
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> centers;
  centers.push_back(z.row(pick(rng)).transpose());
  Vector dist2 = (z.rowwise() - centers.back().transpose()).rowwise().squaredNorm();
  while (static_cast<Index>(centers.size()) < k) {
    const double total = dist2.sum();
    Index chosen = 0;
    if (total <= 0.0) {
      chosen = pick(rng);
    } else {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += dist2(i);
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    }
    centers.push_back(z.row(chosen).transpose());
    dist2 = dist2.cwiseMin(
        (z.rowwise() - centers.back().transpose()).rowwise().squaredNorm());
  }
  return centers;
}

struct Restart {
  GaussianMixture model;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  int rescues = 0;
};

Restart run_em(const Matrix& z, Index k, const EmOptions& opt,
               const Matrix& pooled, Rng& rng) {
  const Index n = z.rows();
  const Index d = z.cols();
  const Matrix floor = opt.reg_floor * Matrix::Identity(d, d);

  Vector weights = Vector::Constant(k, 1.0 / static_cast<double>(k));
  std::vector<Vector> means = seed_means(z, k, rng);
  std::vector<Matrix> covs(static_cast<std::size_t>(k), pooled);

  Restart out;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    out.model = GaussianMixture(weights, means, covs);

    Matrix logp = out.model.component_log_densities(z);
    logp.rowwise() += weights.array().log().matrix().transpose();
    const Vector lse = row_log_sum_exp(logp);
    const double ll = lse.sum();
    if (!std::isfinite(ll)) {
      throw NumericalError("EM produced a non-finite log-likelihood");
    }
    out.trace.push_back(ll);
    out.iterations = it;
    if (it > 0 && std::abs(ll - prev) < opt.tol * std::abs(ll)) {
      out.converged = true;
      break;
    }
    if (it >= opt.max_iter) break;
    prev = ll;

    const Matrix resp = (logp.colwise() - lse).array().exp().matrix();
    for (Index c = 0; c < k; ++c) {
      const double mass = resp.col(c).sum();
      const auto cu = static_cast<std::size_t>(c);
      if (mass < 1e-8 * static_cast<double>(n)) {
        // reseed at the worst-explained point
        Index worst = 0;
        lse.minCoeff(&worst);
        means[cu] = z.row(worst).transpose();
        covs[cu] = pooled;
        weights(c) = 1.0 / static_cast<double>(n);
        ++out.rescues;
        continue;
      }
      weights(c) = mass / static_cast<double>(n);
      means[cu] = (z.transpose() * resp.col(c)) / mass;
      const Matrix centered = z.rowwise() - means[cu].transpose();
      covs[cu] = symmetrized(centered.transpose() *
                             (centered.array().colwise() * resp.col(c).array())
                                 .matrix() /
                             mass) +
                 floor;
    }
    weights /= weights.sum();
  }
  return out;
}

}  // namespace

double log_sum_exp(const Eigen::Ref<const Vector>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Vector row_log_sum_exp(const Matrix& m) {
  Vector mx = m.rowwise().maxCoeff();
  const Vector finite = mx.unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; });
  Vector out = ((m.colwise() - finite).array().exp().rowwise().sum().log()).matrix() + finite;
  for (Index i = 0; i < m.rows(); ++i) {
    if (!std::isfinite(mx(i))) out(i) = mx(i);
  }
  return out;
}

GaussianMixture::GaussianMixture(Vector weights, std::vector<Vector> means,
                                 std::vector<Matrix> covariances)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      covariances_(std::move(covariances)) {
  const Index k = weights_.size();
  if (k < 1) throw ValidationError("mixture needs at least one component");
  if (static_cast<Index>(means_.size()) != k ||
      static_cast<Index>(covariances_.size()) != k) {
    throw ValidationError("mixture weights, means and covariances differ in K");
  }
  if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
    throw ValidationError("mixture weights must be finite and nonnegative");
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > 1e-8) {
    throw ValidationError("mixture weights must sum to 1");
  }
  weights_ /= total;
  log_weights_ = weights_.array().log().matrix();

  const Index d = means_.front().size();
  if (d < 1) throw ValidationError("mixture dimension must be positive");
  factors_.reserve(static_cast<std::size_t>(k));
  log_norm_.reserve(static_cast<std::size_t>(k));
  for (Index c = 0; c < k; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    auto& cov = covariances_[cu];
    if (means_[cu].size() != d || cov.rows() != d || cov.cols() != d) {
      throw ValidationError("mixture component " + std::to_string(c) +
                            " has the wrong dimension");
    }
    if (!means_[cu].allFinite() || !cov.allFinite()) {
      throw ValidationError("mixture component " + std::to_string(c) +
                            " is not finite");
    }
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
      throw ValidationError("covariance " + std::to_string(c) +
                            " is not symmetric");
    }
    cov = symmetrized(cov);
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("covariance " + std::to_string(c) +
                           " is not positive definite");
    }
    const double log_det =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    factors_.push_back(std::move(llt));
    log_norm_.push_back(-0.5 * (static_cast<double>(d) * kLog2Pi + log_det));
  }
}

void GaussianMixture::check_dim(const Vector& z) const {
  if (z.size() != dim()) {
    throw ValidationError("point has dimension " + std::to_string(z.size()) +
                          ", mixture has " + std::to_string(dim()));
  }
}

double GaussianMixture::component_log_density(Index k, const Vector& z) const {
  if (k < 0 || k >= components()) {
    throw ValidationError("component index " + std::to_string(k) +
                          " out of range");
  }
  check_dim(z);
  const auto ku = static_cast<std::size_t>(k);
  const Vector y = factors_[ku].matrixL().solve(z - means_[ku]);
  return log_norm_[ku] - 0.5 * y.squaredNorm();
}

Matrix GaussianMixture::component_log_densities(const Matrix& z) const {
  if (z.cols() != dim()) {
    throw ValidationError("data has dimension " + std::to_string(z.cols()) +
                          ", mixture has " + std::to_string(dim()));
  }
  Matrix out(z.rows(), components());
  for (Index c = 0; c < components(); ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const Matrix diff = (z.rowwise() - means_[cu].transpose()).transpose();
    const Matrix y = factors_[cu].matrixL().solve(diff);
    out.col(c) =
        (log_norm_[cu] - 0.5 * y.colwise().squaredNorm().array()).matrix().transpose();
  }
  return out;
}

double GaussianMixture::log_density(const Vector& z) const {
  check_dim(z);
  Vector terms(components());
  for (Index c = 0; c < components(); ++c) {
    terms(c) = log_weights_(c) + component_log_density(c, z);
  }
  return log_sum_exp(terms);
}

Vector GaussianMixture::log_density_rows(const Matrix& z) const {
  Matrix logp = component_log_densities(z);
  logp.rowwise() += log_weights_.transpose();
  return row_log_sum_exp(logp);
}

Vector GaussianMixture::sample_one(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double u = unit(rng);
  Index chosen = components() - 1;
  double acc = 0.0;
  for (Index c = 0; c < components(); ++c) {
    acc += weights_(c);
    if (u < acc && weights_(c) > 0.0) {
      chosen = c;
      break;
    }
  }
  while (weights_(chosen) <= 0.0) --chosen;  // guards rounding at the top end
  Vector eps(dim());
  for (Index j = 0; j < dim(); ++j) eps(j) = normal(rng);
  const auto cu = static_cast<std::size_t>(chosen);
  return means_[cu] + factors_[cu].matrixL() * eps;
}

Matrix GaussianMixture::sample(Index n, std::uint64_t seed) const {
  if (n < 1) throw ValidationError("sample count must be positive");
  Rng rng(seed);
  Matrix out(n, dim());
  for (Index i = 0; i < n; ++i) out.row(i) = sample_one(rng).transpose();
  return out;
}

GaussianMixture GaussianMixture::marginal(std::span<const Index> coords) const {
  const auto m = static_cast<Index>(coords.size());
  if (m < 1) throw ValidationError("marginal needs at least one coordinate");
  for (Index c : coords) {
    if (c < 0 || c >= dim()) throw ValidationError("marginal coordinate out of range");
  }
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  for (Index c = 0; c < components(); ++c) {
    const auto cu = static_cast<std::size_t>(c);
    Vector mu(m);
    Matrix cov(m, m);
    for (Index a = 0; a < m; ++a) {
      mu(a) = means_[cu](coords[static_cast<std::size_t>(a)]);
      for (Index b = 0; b < m; ++b) {
        cov(a, b) = covariances_[cu](coords[static_cast<std::size_t>(a)],
                                     coords[static_cast<std::size_t>(b)]);
      }
    }
    means.push_back(std::move(mu));
    covs.push_back(std::move(cov));
  }
  return GaussianMixture(weights_, std::move(means), std::move(covs));
}

Vector GaussianMixture::mixture_mean() const {
  Vector mu = Vector::Zero(dim());
  for (Index c = 0; c < components(); ++c) {
    mu += weights_(c) * means_[static_cast<std::size_t>(c)];
  }
  return mu;
}

double total_log_likelihood(const GaussianMixture& model, const Matrix& z) {
  return model.log_density_rows(z).sum();
}

EmFit fit_em(const Matrix& z, Index k, const EmOptions& options) {
  if (k < 1) throw ValidationError("EM needs K >= 1");
  if (z.rows() < k) {
    throw Error(ErrorKind::kInsufficientData,
                "EM needs at least K=" + std::to_string(k) + " rows, got " +
                    std::to_string(z.rows()));
  }
  if (z.cols() < 1) throw ValidationError("EM needs at least one column");
  if (!z.allFinite()) throw ValidationError("EM input has non-finite rows");
  if (options.n_init < 1) throw ValidationError("EM needs n_init >= 1");
  if (!(options.reg_floor > 0.0)) {
    throw ValidationError("EM regularization floor must be positive");
  }

  const Vector mean = z.colwise().mean();
  const Matrix pooled =
      biased_covariance(z, mean) +
      options.reg_floor * Matrix::Identity(z.cols(), z.cols());

  EmFit best;
  bool have = false;
  for (int r = 0; r < options.n_init; ++r) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    Restart run = run_em(z, k, options, pooled, rng);
    const double ll = run.trace.back();
    if (!have || ll > best.log_likelihood) {
      best.model = std::move(run.model);
      best.log_likelihood = ll;
      best.log_likelihood_trace = std::move(run.trace);
      best.iterations = run.iterations;
      best.converged = run.converged;
      best.rescues = run.rescues;
      have = true;
    }
  }
  return best;
}

Index parameter_count(Index k, Index d) {
  return (k - 1) + k * d + k * d * (d + 1) / 2;
}

double information_criterion(const GaussianMixture& model, const Matrix& z,
                             Criterion which) {
  if (z.rows() < 1) throw ValidationError("criterion needs data");
  const double ll = total_log_likelihood(model, z);
  const auto p = static_cast<double>(parameter_count(model.components(), model.dim()));
  if (which == Criterion::kBic) {
    return p * std::log(static_cast<double>(z.rows())) - 2.0 * ll;
  }
  return 2.0 * p - 2.0 * ll;
}

KSelection select_k(const Matrix& z, std::span<const Index> k_range,
                    Criterion which, const EmOptions& options) {
  if (k_range.empty()) throw ValidationError("K range is empty");
  KSelection out;
  double best = std::numeric_limits<double>::infinity();
  for (Index k : k_range) {
    KScore score;
    score.k = k;
    try {
      EmFit fit = fit_em(z, k, options);
      score.ok = true;
      score.log_likelihood = fit.log_likelihood;
      const auto p = static_cast<double>(parameter_count(k, z.cols()));
      score.bic = p * std::log(static_cast<double>(z.rows())) -
                  2.0 * fit.log_likelihood;
      score.aic = 2.0 * p - 2.0 * fit.log_likelihood;
      const double value = which == Criterion::kBic ? score.bic : score.aic;
      if (value < best || (value == best && k < out.best_k)) {
        best = value;
        out.best_k = k;
        out.best_model = std::move(fit.model);
      }
    } catch (const Error& e) {
      score.message = e.what();
    }
    out.scores.push_back(std::move(score));
  }
  if (out.best_k == 0) {
    throw NumericalError("no K in the range could be fitted");
  }
  return out;
}

std::string to_string(Criterion c) { return c == Criterion::kBic ? "bic" : "aic"; }

}  // namespace exvi
