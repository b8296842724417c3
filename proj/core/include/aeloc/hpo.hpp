#ifndef AELOC_HPO_HPP
#define AELOC_HPO_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "aeloc/gp.hpp"
#include "aeloc/train.hpp"

namespace aeloc {

// Search space over (optimizer, batch size). Encoded as 4 continuous
// dimensions: a 3-way one-hot for the optimizer plus batch size scaled to
// [0, 1]; decode rounds and clamps, so encode(decode(.)) is the identity on
// valid points.
struct SearchSpace {
  std::size_t batch_min = 8;
  std::size_t batch_max = 64;

  static constexpr std::size_t kDims = 4;
  std::size_t cardinality() const { return 3 * (batch_max - batch_min + 1); }

  Eigen::VectorXd encode(OptimizerKind opt, std::size_t batch_size) const;
  std::pair<OptimizerKind, std::size_t> decode(const Eigen::VectorXd& x) const;
};

// Expected improvement for minimization:
//   imp = f_best - mu - xi
//   EI  = imp * Phi(imp / sigma) + sigma * phi(imp / sigma)   for sigma > 0
//   EI  = 0                                                    for sigma = 0
// (the source formulation maximizes f; minimizing a loss flips the sign of
// the improvement term).
double expected_improvement(double mu, double sigma, double f_best, double xi);

struct TrialRecord {
  std::size_t iteration = 0;
  HyperParams hyperparams;
  std::vector<double> fold_losses;
  double mean_loss = 0.0;
  double seconds = 0.0;  // wall time, informational only
};

struct ProposeResult {
  OptimizerKind optimizer;
  std::size_t batch_size;
};

// Maximize EI over 2048 quasi-random candidate encodings plus local
// refinement from the best 8; deterministic per seed; skips already
// evaluated decoded points (nearest unevaluated neighbor). Returns nullopt
// when the whole discrete space has been evaluated.
std::optional<ProposeResult> propose_next(
    const GPSurrogate& gp, const SearchSpace& space, double xi, std::uint64_t seed,
    const std::vector<std::pair<OptimizerKind, std::size_t>>& evaluated);

struct BoConfig {
  std::size_t iterations = 10;  // total trials, including initial ones
  std::size_t init_count = 3;
  double xi = 0.01;
  SearchSpace space;
  KernelConfig kernel;
};

struct BoResult {
  std::vector<TrialRecord> trials;
  std::size_t best_index = 0;
};

// Objective: fold losses for one hyperparameter setting (throwing objectives
// are recorded as +inf and the loop continues). The BO loop is sequential:
// init_count quasi-random trials, then EI-driven proposals.
using Objective = std::function<std::vector<double>(const HyperParams&)>;

BoResult optimize(const Objective& objective, const HyperParams& base, const BoConfig& cfg,
                  std::uint64_t seed);

}  // namespace aeloc

#endif  // AELOC_HPO_HPP
