#include "aeloc/gp.hpp"

#include <cmath>
#include <limits>

#include "aeloc/errors.hpp"
#include "aeloc/rng.hpp"

namespace aeloc {

double norm_pdf(double z) { return std::exp(-0.5 * z * z) * 0.3989422804014326779; }
double norm_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

namespace {

constexpr double kSqrt5 = 2.2360679774997896964;

struct Hyper {
  Eigen::VectorXd log_ls;
  double log_sf2;  // log signal variance
  double log_sn2;  // log noise variance
};

double matern52(double r) {
  return (1.0 + kSqrt5 * r + 5.0 / 3.0 * r * r) * std::exp(-kSqrt5 * r);
}

// d k / d r without the signal-variance factor.
double matern52_dr(double r) {
  return -(5.0 / 3.0) * r * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
}

double scaled_dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const Eigen::VectorXd& ls) {
  double s = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double t = (a[d] - b[d]) / ls[d];
    s += t * t;
  }
  return std::sqrt(s);
}

Eigen::MatrixXd build_K(const Eigen::MatrixXd& X, const Hyper& h) {
  const Eigen::Index n = X.rows();
  const Eigen::VectorXd ls = h.log_ls.array().exp();
  const double sf2 = std::exp(h.log_sf2);
  const double sn2 = std::exp(h.log_sn2);
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = sf2 + sn2;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = scaled_dist(X.row(i), X.row(j), ls);
      K(i, j) = K(j, i) = sf2 * matern52(r);
    }
  }
  return K;
}

// Cholesky with jitter escalation up to 1e-4; throws NumericalError past that.
Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(Eigen::MatrixXd K) {
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd Kj = K;
    if (jitter > 0.0) Kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) return llt;
    jitter = (jitter == 0.0) ? 1.0e-10 : jitter * 10.0;
    if (jitter > 1.0e-4) break;
  }
  throw NumericalError("GP covariance not positive definite after jitter escalation");
}

struct LmlResult {
  double value;
  Eigen::VectorXd grad;  // d lml / d [log_ls..., log_sf2, log_sn2]
};

LmlResult lml_and_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Hyper& h) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::VectorXd ls = h.log_ls.array().exp();
  const double sf2 = std::exp(h.log_sf2);
  const double sn2 = std::exp(h.log_sn2);

  Eigen::MatrixXd K = build_K(X, h);
  Eigen::LLT<Eigen::MatrixXd> llt = chol_with_jitter(K);
  const Eigen::VectorXd alpha = llt.solve(y);

  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));

  LmlResult out;
  out.value = -0.5 * y.dot(alpha) - logdet -
              0.5 * static_cast<double>(n) * std::log(2.0 * 3.14159265358979323846);

  // dL/dtheta = 0.5 tr((alpha alpha^T - K^-1) dK/dtheta)
  const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd A = alpha * alpha.transpose() - Kinv;

  out.grad = Eigen::VectorXd::Zero(d + 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a_ij = A(i, j);
      if (i == j) {
        out.grad[d] += 0.5 * a_ij * sf2;        // dK_ii/dlog_sf2 = sf2
        out.grad[d + 1] += 0.5 * a_ij * sn2;    // dK_ii/dlog_sn2 = sn2
        continue;
      }
      const double r = scaled_dist(X.row(i), X.row(j), ls);
      const double corr = matern52(r);
      out.grad[d] += 0.5 * a_ij * sf2 * corr;
      if (r > 0.0) {
        const double dk_dr = sf2 * matern52_dr(r);
        for (Eigen::Index dd = 0; dd < d; ++dd) {
          const double t = (X(i, dd) - X(j, dd)) / ls[dd];
          // dr/dlog_ls = -t^2 / r
          out.grad[dd] += 0.5 * a_ij * dk_dr * (-(t * t) / r);
        }
      }
    }
  }
  return out;
}

}  // namespace

GPSurrogate GPSurrogate::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const KernelConfig& cfg) {
  if (X.rows() < 1) throw InputError("GP fit needs at least one observation");
  if (X.rows() != y.size()) throw InputError("GP fit: X and y disagree");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!std::isfinite(y[i])) throw InputError("GP fit: non-finite target");

  GPSurrogate gp;
  gp.X_ = X;
  gp.y_mean_ = y.mean();
  gp.y_centered_ = y.array() - gp.y_mean_;

  const Eigen::Index d = X.cols();
  const double y_var = gp.y_centered_.squaredNorm() / std::max<double>(1.0, y.size() - 1);
  const double sf2_init = std::max(y_var, 1.0e-4);

  Hyper best{};
  double best_lml = -std::numeric_limits<double>::infinity();
  Rng rng(0x9bde7bd1c0ffee11ULL);

  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, cfg.fit_restarts); ++restart) {
    Hyper h;
    h.log_ls = Eigen::VectorXd::Constant(d, std::log(0.5));
    if (restart > 0)
      for (Eigen::Index k = 0; k < d; ++k)
        h.log_ls[k] += rng.next_uniform(-1.5, 1.5);
    h.log_sf2 = std::log(sf2_init) + (restart > 0 ? rng.next_uniform(-1.0, 1.0) : 0.0);
    h.log_sn2 = std::log(std::max(cfg.noise_floor, 1.0e-4 * sf2_init));

    // Gradient ascent with an adaptive step.
    double step = 0.1;
    LmlResult cur;
    try {
      cur = lml_and_grad(X, gp.y_centered_, h);
    } catch (const NumericalError&) {
      continue;
    }
    for (std::size_t it = 0; it < cfg.fit_steps; ++it) {
      Hyper trial = h;
      trial.log_ls += step * cur.grad.head(d);
      trial.log_sf2 += step * cur.grad[d];
      trial.log_sn2 += step * cur.grad[d + 1];
      // Keep hyperparameters in a sane box.
      for (Eigen::Index k = 0; k < d; ++k)
        trial.log_ls[k] = std::clamp(trial.log_ls[k], std::log(1.0e-2), std::log(1.0e2));
      trial.log_sf2 = std::clamp(trial.log_sf2, std::log(1.0e-8), std::log(1.0e4));
      trial.log_sn2 = std::max(trial.log_sn2, std::log(cfg.noise_floor));

      LmlResult next;
      try {
        next = lml_and_grad(X, gp.y_centered_, trial);
      } catch (const NumericalError&) {
        step *= 0.5;
        if (step < 1.0e-6) break;
        continue;
      }
      if (next.value > cur.value) {
        h = trial;
        cur = next;
        step = std::min(step * 1.2, 1.0);
      } else {
        step *= 0.5;
        if (step < 1.0e-6) break;
      }
    }
    if (cur.value > best_lml) {
      best_lml = cur.value;
      best = h;
    }
  }

  if (!std::isfinite(best_lml))
    throw NumericalError("GP hyperparameter fit failed on every restart");

  gp.length_scales_ = best.log_ls.array().exp();
  gp.signal_var_ = std::exp(best.log_sf2);
  gp.noise_var_ = std::max(std::exp(best.log_sn2), cfg.noise_floor);
  gp.lml_ = best_lml;

  Hyper h = best;
  h.log_sn2 = std::log(gp.noise_var_);
  gp.llt_ = chol_with_jitter(build_K(X, h));
  gp.alpha_ = gp.llt_.solve(gp.y_centered_);
  return gp;
}

void GPSurrogate::predict(const Eigen::VectorXd& x, double* mu, double* var) const {
  const Eigen::Index n = X_.rows();
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = scaled_dist(X_.row(i), x, length_scales_);
    k_star[i] = signal_var_ * matern52(r);
  }
  if (mu) *mu = y_mean_ + k_star.dot(alpha_);
  if (var) {
    const Eigen::VectorXd v = llt_.solve(k_star);
    *var = std::max(0.0, signal_var_ - k_star.dot(v));
  }
}

}  // namespace aeloc
