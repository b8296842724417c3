#ifndef AELOC_GP_HPP
#define AELOC_GP_HPP

#include <Eigen/Dense>

#include <vector>

namespace aeloc {

struct KernelConfig {
  double noise_floor = 1.0e-6;  // minimum observation noise variance
  // Log-marginal-likelihood maximization budget.
  std::size_t fit_restarts = 6;
  std::size_t fit_steps = 120;
};

// Gaussian-process regressor with a Matern-5/2 ARD kernel. Kernel
// hyperparameters (per-dimension length-scales, signal variance,
// observation noise) are fit by multi-start gradient ascent on the log
// marginal likelihood; the Cholesky factor of K + sigma_n^2 I is cached.
class GPSurrogate {
 public:
  static GPSurrogate fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const KernelConfig& cfg = {});

  // Posterior mean and variance (variance clamped at 0).
  void predict(const Eigen::VectorXd& x, double* mu, double* var) const;

  double log_marginal_likelihood() const { return lml_; }
  const Eigen::VectorXd& length_scales() const { return length_scales_; }
  double signal_variance() const { return signal_var_; }
  double noise_variance() const { return noise_var_; }
  std::size_t size() const { return static_cast<std::size_t>(X_.rows()); }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_centered_;
  double y_mean_ = 0.0;
  Eigen::VectorXd length_scales_;
  double signal_var_ = 1.0;
  double noise_var_ = 1.0e-6;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

// Standard normal pdf / cdf.
double norm_pdf(double z);
double norm_cdf(double z);

}  // namespace aeloc

#endif  // AELOC_GP_HPP
