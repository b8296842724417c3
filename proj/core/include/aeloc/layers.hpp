#ifndef AELOC_LAYERS_HPP
#define AELOC_LAYERS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "aeloc/rng.hpp"
#include "aeloc/tensor.hpp"

namespace aeloc {

// A named trainable tensor with its gradient accumulator. Values and grads
// are shared_ptrs so the shared-branch ablation can alias one parameter set
// across four branch instances.
struct Param {
  std::string name;
  std::shared_ptr<TensorGrid> value;
  std::shared_ptr<TensorGrid> grad;
};

// Gaussian Xavier initialization: N(0, 2/(fan_in + fan_out)).
void xavier_init(TensorGrid& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Base class for differentiable layers. forward() caches whatever backward()
// needs; backward() returns the input gradient and accumulates parameter
// gradients (+=). Calling backward without a preceding forward is a usage
// error.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual TensorGrid forward(const TensorGrid& x, bool train) = 0;
  virtual TensorGrid backward(const TensorGrid& dy) = 0;
  virtual std::vector<Param> params() { return {}; }
  virtual std::string kind() const = 0;

 protected:
  void require_forward(bool have) const;
};

// 2-D convolution (cross-correlation plus bias), square kernel. Input
// (B, C_in, H, W) -> (B, C_out, H', W') with
// H' = floor((H + 2 pad - k)/stride) + 1. Backed by im2col and a GEMM.
class Conv2d : public Layer {
 public:
  Conv2d(std::size_t c_in, std::size_t c_out, std::size_t kernel, std::size_t stride,
         std::size_t pad, Rng& rng, const std::string& name);
  Conv2d(const Conv2d& share_params_from, const std::string& name);

  TensorGrid forward(const TensorGrid& x, bool train) override;
  TensorGrid backward(const TensorGrid& dy) override;
  std::vector<Param> params() override { return {weight_, bias_}; }
  std::string kind() const override { return "conv2d"; }

 private:
  std::size_t c_in_, c_out_, k_, stride_, pad_;
  Param weight_;  // (C_out, C_in, k, k)
  Param bias_;    // (C_out)
  TensorGrid cols_;  // saved im2col of the padded input
  std::vector<std::size_t> x_shape_;
  bool have_forward_ = false;
};

// 2x2 max pooling with stride 2 (ties resolve to the first element scanned).
class MaxPool2d : public Layer {
 public:
  MaxPool2d() = default;
  TensorGrid forward(const TensorGrid& x, bool train) override;
  TensorGrid backward(const TensorGrid& dy) override;
  std::string kind() const override { return "maxpool2d"; }

 private:
  std::vector<std::size_t> x_shape_;
  std::vector<std::uint32_t> argmax_;
  bool have_forward_ = false;
};

class Relu : public Layer {
 public:
  TensorGrid forward(const TensorGrid& x, bool train) override;
  TensorGrid backward(const TensorGrid& dy) override;
  std::string kind() const override { return "relu"; }

 private:
  std::vector<bool> mask_;
  bool have_forward_ = false;
};

// Inverted dropout: training zeroes a `rate` fraction and scales survivors
// by 1/(1-rate); eval is the identity. The mask comes from an Rng owned by
// the model so checkpoints capture the stream position.
class Dropout : public Layer {
 public:
  Dropout(double rate, Rng* rng) : rate_(rate), rng_(rng) {}
  TensorGrid forward(const TensorGrid& x, bool train) override;
  TensorGrid backward(const TensorGrid& dy) override;
  std::string kind() const override { return "dropout"; }

 private:
  double rate_;
  Rng* rng_;
  std::vector<double> mask_;
  bool have_forward_ = false;
};

// (B, C, H, W) -> (B, C*H*W)
class Flatten : public Layer {
 public:
  TensorGrid forward(const TensorGrid& x, bool train) override;
  TensorGrid backward(const TensorGrid& dy) override;
  std::string kind() const override { return "flatten"; }

 private:
  std::vector<std::size_t> x_shape_;
  bool have_forward_ = false;
};

// y = x W^T + b on (B, in) -> (B, out).
class FullyConnected : public Layer {
 public:
  FullyConnected(std::size_t in, std::size_t out, Rng& rng, const std::string& name);
  FullyConnected(const FullyConnected& share_params_from, const std::string& name);

  TensorGrid forward(const TensorGrid& x, bool train) override;
  TensorGrid backward(const TensorGrid& dy) override;
  std::vector<Param> params() override { return {weight_, bias_}; }
  std::string kind() const override { return "fully_connected"; }

 private:
  std::size_t in_, out_;
  Param weight_;  // (out, in)
  Param bias_;    // (out)
  TensorGrid x_saved_;
  bool have_forward_ = false;
};

// 1-D batch normalization over features of (B, F). Train mode normalizes by
// batch statistics (biased variance) and updates running statistics with
// momentum 0.1; eval mode uses the running statistics. epsilon = 1e-5.
class BatchNorm1d : public Layer {
 public:
  BatchNorm1d(std::size_t features, const std::string& name);

  TensorGrid forward(const TensorGrid& x, bool train) override;
  TensorGrid backward(const TensorGrid& dy) override;
  std::vector<Param> params() override { return {gamma_, beta_}; }
  std::string kind() const override { return "batch_norm"; }

  TensorGrid& running_mean() { return running_mean_; }
  TensorGrid& running_var() { return running_var_; }

  static constexpr double kMomentum = 0.1;
  static constexpr double kEpsilon = 1.0e-5;

 private:
  std::size_t features_;
  Param gamma_, beta_;
  TensorGrid running_mean_, running_var_;
  TensorGrid x_hat_;            // normalized input, saved in train mode
  std::vector<double> inv_std_;  // per feature
  bool train_mode_ = false;
  bool have_forward_ = false;
};

// Feature-axis concatenation of equal-batch blocks, with split() as the
// backward. Used by the model container rather than Sequential.
TensorGrid concat_features(const std::vector<const TensorGrid*>& parts);
std::vector<TensorGrid> split_features(const TensorGrid& dy,
                                       const std::vector<std::size_t>& widths);

class Sequential {
 public:
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  TensorGrid forward(const TensorGrid& x, bool train);
  TensorGrid backward(const TensorGrid& dy);
  std::vector<Param> params();
  Layer& layer(std::size_t i) { return *layers_[i]; }
  std::size_t size() const { return layers_.size(); }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace aeloc

#endif  // AELOC_LAYERS_HPP
