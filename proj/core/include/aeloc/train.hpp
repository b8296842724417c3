#ifndef AELOC_TRAIN_HPP
#define AELOC_TRAIN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aeloc/dsp.hpp"
#include "aeloc/model.hpp"
#include "aeloc/sim.hpp"

namespace aeloc {

enum class OptimizerKind { sgd, rmsprop, adam };

OptimizerKind optimizer_from_string(const std::string& s);
std::string optimizer_to_string(OptimizerKind k);

struct HyperParams {
  OptimizerKind optimizer = OptimizerKind::rmsprop;
  std::size_t batch_size = 23;
  double learning_rate = 1.0e-3;
  std::size_t epochs = 120;

  void validate() const;
};

// Stateful parameter updater. State slots are named per parameter so they
// round-trip through checkpoints.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}

  // p <- p - lr * g                         (sgd)
  // v <- 0.9 v + 0.1 g^2,  p <- p - lr * g / (sqrt(v) + 1e-8)   (rmsprop)
  // adam with beta1 0.9, beta2 0.999, eps 1e-8, bias correction
  void step(const std::vector<Param>& params);

  std::map<std::string, TensorGrid>& state() { return state_; }
  const std::map<std::string, TensorGrid>& state() const { return state_; }
  void load_state(std::map<std::string, TensorGrid> s) { state_ = std::move(s); }
  OptimizerKind kind() const { return kind_; }

 private:
  OptimizerKind kind_;
  double lr_;
  std::size_t t_ = 0;  // adam step counter
  std::map<std::string, TensorGrid> state_;
};

// Mean squared error over all outputs: mean((pred - target)^2). Gradient
// written to dpred.
double mse_loss(const TensorGrid& pred, const TensorGrid& target, TensorGrid* dpred);

struct TrainResult {
  std::vector<double> loss_history;  // per-epoch mean training loss
};

// Shuffled mini-batch training, deterministic given (seed, threads);
// throws NumericalError on divergence (loss turns non-finite).
TrainResult train_model(AeslNet& net, Optimizer& opt, const std::vector<Sample>& samples,
                        const HyperParams& hp, std::uint64_t seed, std::size_t threads = 1);

// Mean MSE of the model (eval mode) over a set of samples.
double evaluate_mse(AeslNet& net, const std::vector<Sample>& samples);

// Forward one sample in eval mode and denormalize to plate mm.
std::pair<double, double> predict(AeslNet& net, const Sample& sample, const PlateSpec& plate);

// Pack samples[indices] into a (B, 4, H, W) batch plus (B, 2) labels.
void make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& indices,
                TensorGrid* batch, TensorGrid* labels);

}  // namespace aeloc

#endif  // AELOC_TRAIN_HPP
