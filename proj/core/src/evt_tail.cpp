#include "exvi/evt_tail.hpp"

#include "exvi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace exvi {

namespace {

struct Objective {
  double value = 0.0;  // mean log-likelihood
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
};

// Mean log-likelihood and its gradient with respect to (log s, log alpha).
Objective mean_log_lik(std::span<const double> ys, double m,
                       const Eigen::Vector2d& p) {
  const double ls = p(0);
  const double alpha = std::exp(p(1));
  const double n = static_cast<double>(ys.size());
  double sum_l = 0.0;
  double sum_t = 0.0;
  double sum_tl = 0.0;
  for (double y : ys) {
    const double l = std::log(y - m) - ls;
    const double t = std::exp(-alpha * l);
    sum_l += l;
    sum_t += t;
    sum_tl += t * l;
  }
  Objective out;
  out.value = p(1) - ls - (alpha + 1.0) * sum_l / n - sum_t / n;
  out.grad(0) = alpha * (1.0 - sum_t / n);
  out.grad(1) = 1.0 - alpha * sum_l / n + alpha * sum_tl / n;
  if (!std::isfinite(out.value) || !out.grad.allFinite()) {
    out.value = -std::numeric_limits<double>::infinity();
  }
  return out;
}

Eigen::Vector2d initial_guess(std::vector<double> shifted) {
  std::sort(shifted.begin(), shifted.end(), std::greater<>());
  const std::size_t n = shifted.size();
  const std::size_t k = std::clamp<std::size_t>(n / 10, 2, n - 1);
  double hill = 0.0;
  for (std::size_t i = 0; i < k; ++i) hill += std::log(shifted[i] / shifted[k]);
  hill /= static_cast<double>(k);
  double alpha = hill > 0.0 ? 1.0 / hill : 1.0;
  alpha = std::clamp(alpha, 0.05, 100.0);
  const double median = n % 2 ? shifted[n / 2]
                              : 0.5 * (shifted[n / 2 - 1] + shifted[n / 2]);
  const double s = median * std::pow(std::log(2.0), 1.0 / alpha);
  return {std::log(s), std::log(alpha)};
}

FrechetFit fit_fixed_location(std::span<const double> ys, double m) {
  std::vector<double> shifted;
  shifted.reserve(ys.size());
  for (double y : ys) {
    if (!std::isfinite(y) || y - m <= 0.0) {
      throw ValidationError(
          "Frechet fit needs finite samples strictly above the location");
    }
    shifted.push_back(y - m);
  }

  Eigen::Vector2d p = initial_guess(shifted);
  Objective cur = mean_log_lik(ys, m, p);
  if (!std::isfinite(cur.value)) {
    // fall back to a neutral start when the Hill guess overflows
    p = {std::log(shifted[shifted.size() / 2]), 0.0};
    cur = mean_log_lik(ys, m, p);
  }
  // BFGS on the negated objective; H approximates the inverse Hessian
  Eigen::Matrix2d h = Eigen::Matrix2d::Identity();
  std::ostringstream trace;
  int it = 0;
  constexpr int kMaxIter = 500;
  constexpr double kGradTol = 1e-11;
  for (; it < kMaxIter && cur.grad.norm() > kGradTol; ++it) {
    Eigen::Vector2d dir = h * cur.grad;  // ascent direction
    if (dir.dot(cur.grad) <= 0.0) {
      h.setIdentity();
      dir = cur.grad;
    }
    // at most one unit in log-parameter space per iteration
    if (dir.norm() > 1.0) dir /= dir.norm();
    double step = 1.0;
    Objective next;
    Eigen::Vector2d cand;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      cand = p + step * dir;
      next = mean_log_lik(ys, m, cand);
      if (std::isfinite(next.value) &&
          next.value >= cur.value + 1e-4 * step * dir.dot(cur.grad)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // no measurable improvement left at double precision
      if (cur.grad.norm() < 1e-7) break;
      trace << "iteration " << it << ": line search failed at log s=" << p(0)
            << " log alpha=" << p(1) << " |grad|=" << cur.grad.norm();
      throw NumericalError("Frechet MLE did not converge: " + trace.str());
    }
    const Eigen::Vector2d sk = cand - p;
    const Eigen::Vector2d yk = cur.grad - next.grad;  // gradient of -f
    const double sy = sk.dot(yk);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
      h = (id - rho * sk * yk.transpose()) * h *
              (id - rho * yk * sk.transpose()) +
          rho * sk * sk.transpose();
    }
    const bool stalled =
        next.value - cur.value <=
        4.0 * std::numeric_limits<double>::epsilon() * std::abs(cur.value);
    p = cand;
    cur = next;
    // objective flat to rounding; the gradient is as small as it gets
    if (stalled && cur.grad.norm() < 1e-7) break;
  }
  if (cur.grad.norm() > 1e-6) {
    throw NumericalError("Frechet MLE stopped with gradient norm " +
                         std::to_string(cur.grad.norm()));
  }

  FrechetFit fit;
  fit.tail.s = std::exp(p(0));
  fit.tail.alpha = std::exp(p(1));
  fit.tail.m = m;
  fit.log_likelihood = cur.value * static_cast<double>(ys.size());
  fit.gradient_norm = cur.grad.norm();
  fit.iterations = it;
  return fit;
}

}  // namespace

void FrechetTail::validate() const {
  if (!(s > 0.0) || !(alpha > 0.0) || !std::isfinite(s) ||
      !std::isfinite(alpha) || !std::isfinite(m) || !std::isfinite(sigma_bar)) {
    throw ValidationError("Frechet tail needs finite s > 0 and alpha > 0");
  }
  if (!(floor > 0.0 && floor < 1.0)) {
    throw ValidationError("probability floor must be in (0, 1)");
  }
}

double frechet_log_pdf(const FrechetTail& tail, double y) {
  if (!(y > tail.m)) return kLogDensitySentinel;
  const double l = std::log((y - tail.m) / tail.s);
  return std::log(tail.alpha) - std::log(tail.s) - (tail.alpha + 1.0) * l -
         std::exp(-tail.alpha * l);
}

double frechet_cdf(const FrechetTail& tail, double y) {
  if (!(y > tail.m)) return 0.0;
  return std::exp(-std::pow((y - tail.m) / tail.s, -tail.alpha));
}

double exceedance_prob(const FrechetTail& tail, double sigma_surrogate) {
  const double p = frechet_cdf(tail, sigma_surrogate - tail.sigma_bar);
  return std::clamp(p, tail.floor, 1.0);
}

double frechet_log_likelihood(std::span<const double> ys, double s,
                              double alpha, double m) {
  FrechetTail t;
  t.s = s;
  t.alpha = alpha;
  t.m = m;
  double ll = 0.0;
  for (double y : ys) {
    if (!(y > m)) return -std::numeric_limits<double>::infinity();
    ll += frechet_log_pdf(t, y);
  }
  return ll;
}

FrechetFit fit_frechet_mle(std::span<const double> ys, TailLocation location) {
  if (ys.size() < 10) {
    throw ValidationError("Frechet fit needs at least 10 samples, got " +
                          std::to_string(ys.size()));
  }
  if (location == TailLocation::kZero) return fit_fixed_location(ys, 0.0);

  const double lo = *std::min_element(ys.begin(), ys.end());
  std::vector<double> sorted(ys.begin(), ys.end());
  std::sort(sorted.begin(), sorted.end());
  const double spread = std::max(sorted[sorted.size() / 2] - lo,
                                 1e-12 * std::max(1.0, std::abs(lo)));
  std::vector<double> grid;
  constexpr int kGrid = 40;
  for (int j = 0; j < kGrid; ++j) {
    grid.push_back(lo - 2.0 * spread * (1.0 - static_cast<double>(j) / kGrid));
  }
  if (lo > 0.0) grid.push_back(0.0);

  FrechetFit best;
  bool have = false;
  for (double m : grid) {
    try {
      FrechetFit fit = fit_fixed_location(ys, m);
      if (!have || fit.log_likelihood > best.log_likelihood) {
        best = fit;
        have = true;
      }
    } catch (const NumericalError&) {
      // skip grid points where the optimizer cannot settle
    }
  }
  if (!have) throw NumericalError("profile-likelihood Frechet fit failed");
  return best;
}

FrechetFit fit_exceedance_tail(std::span<const double> surrogate_stress,
                               double sigma_bar, TailLocation location) {
  std::vector<double> ys;
  for (double s : surrogate_stress) {
    if (s > sigma_bar) ys.push_back(s - sigma_bar);
  }
  if (ys.size() < 10) {
    throw Error(ErrorKind::kEmptyEvidence,
                "only " + std::to_string(ys.size()) +
                    " surrogate stresses exceed the threshold; need at least "
                    "10 to fit the tail (review the threshold)");
  }
  FrechetFit fit = fit_frechet_mle(ys, location);
  fit.tail.sigma_bar = sigma_bar;
  return fit;
}

std::string to_string(TailLocation loc) {
  return loc == TailLocation::kZero ? "zero" : "profile";
}

TailLocation tail_location_from_string(const std::string& s) {
  if (s == "zero") return TailLocation::kZero;
  if (s == "profile") return TailLocation::kProfile;
  throw ValidationError("unknown tail location '" + s + "'");
}

}  // namespace exvi
