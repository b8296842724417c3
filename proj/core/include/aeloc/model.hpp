#ifndef AELOC_MODEL_HPP
#define AELOC_MODEL_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aeloc/layers.hpp"
#include "aeloc/rng.hpp"
#include "aeloc/tensor.hpp"

namespace aeloc {

struct ModelConfig {
  std::size_t image_h = 64;
  std::size_t image_w = 64;
  std::vector<std::size_t> branch_channels{8, 16, 32, 64};
  std::size_t branch_fc_out = 128;
  std::vector<std::size_t> head_widths{256, 128, 64, 32};
  double dropout_rate = 0.25;
  // Ablation variant: all four branches alias one parameter set.
  bool shared_branch = false;
  std::uint64_t init_seed = 0;

  std::size_t branch_flat() const;  // flattened features after the conv stack
};

// Parallel-branch localization network: each input channel is routed
// through its own convolutional feature extractor (conv 3x3 / relu /
// pool 2x2, four stages, then dropout and a fully connected layer); the
// four 128-wide embeddings are concatenated and a batch-normalized stack of
// five fully connected layers regresses the normalized (x, y).
class AeslNet {
 public:
  explicit AeslNet(const ModelConfig& cfg);

  // batch: (B, 4, H, W) -> (B, 2). Train mode enables dropout and batch
  // statistics; eval mode is deterministic.
  TensorGrid forward(const TensorGrid& batch, bool train);

  // dpred: (B, 2); accumulates parameter gradients, returns nothing useful
  // to the caller (input gradients are discarded at the image boundary).
  void backward(const TensorGrid& dpred);

  // Unique trainable parameters (shared-branch aliases deduplicated).
  std::vector<Param> parameters();
  void zero_grads();

  const ModelConfig& config() const { return cfg_; }
  Rng& dropout_rng() { return dropout_rng_; }
  std::uint64_t dropout_rng_state() const { return dropout_rng_.state(); }
  void set_dropout_rng_state(std::uint64_t s) { dropout_rng_.set_state(s); }

  // Named state beyond trainable parameters (batch-norm running stats).
  std::vector<std::pair<std::string, TensorGrid*>> state_tensors();

  // Number of trainable scalars (deduplicated).
  std::size_t parameter_count();

 private:
  ModelConfig cfg_;
  Rng dropout_rng_;
  std::array<Sequential, 4> branches_;
  Sequential head_;
  BatchNorm1d* head_bn_ = nullptr;
  std::size_t threads_ = 1;

 public:
  // Branch-level parallelism: branches are independent subgraphs, so the
  // result is bit-identical for any thread count. Ignored (serial) for the
  // shared-branch variant, whose branches accumulate into common grads.
  void set_threads(std::size_t n) { threads_ = n; }

 private:
  std::array<TensorGrid, 4> branch_out_;
  std::size_t last_batch_ = 0;
  bool have_forward_ = false;
};

// Checkpoint: little-endian, magic "AESL", u32 version=1, u32 tensor count,
// then per tensor: u16 name length + UTF-8 name, u8 rank, u64 dims, f64
// data. Carries parameters, optimizer slots, batch-norm running stats, the
// dropout rng state and the model topology.
void save_checkpoint(AeslNet& net,
                     const std::map<std::string, TensorGrid>& optimizer_state,
                     const std::string& path);

struct Checkpoint {
  ModelConfig config;
  std::unique_ptr<AeslNet> net;
  std::map<std::string, TensorGrid> optimizer_state;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace aeloc

#endif  // AELOC_MODEL_HPP
