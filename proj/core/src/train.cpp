#include "aeloc/train.hpp"

#include <algorithm>
#include <cmath>

#include "aeloc/errors.hpp"
#include "aeloc/rng.hpp"

namespace aeloc {

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "rmsprop") return OptimizerKind::rmsprop;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer: " + s);
}

std::string optimizer_to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

void HyperParams::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
}

void Optimizer::step(const std::vector<Param>& params) {
  ++t_;
  for (const auto& p : params) {
    TensorGrid& v = *p.value;
    const TensorGrid& g = *p.grad;
    switch (kind_) {
      case OptimizerKind::sgd: {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr_ * g[i];
        break;
      }
      case OptimizerKind::rmsprop: {
        auto [it, fresh] = state_.try_emplace(p.name + ".v", v.shape());
        TensorGrid& acc = it->second;
        for (std::size_t i = 0; i < v.size(); ++i) {
          acc[i] = 0.9 * acc[i] + 0.1 * g[i] * g[i];
          v[i] -= lr_ * g[i] / (std::sqrt(acc[i]) + 1.0e-8);
        }
        break;
      }
      case OptimizerKind::adam: {
        auto [mit, mf] = state_.try_emplace(p.name + ".m", v.shape());
        auto [vit, vf] = state_.try_emplace(p.name + ".v", v.shape());
        TensorGrid& m = mit->second;
        TensorGrid& s = vit->second;
        const double b1 = 0.9, b2 = 0.999;
        const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        for (std::size_t i = 0; i < v.size(); ++i) {
          m[i] = b1 * m[i] + (1.0 - b1) * g[i];
          s[i] = b2 * s[i] + (1.0 - b2) * g[i] * g[i];
          const double mh = m[i] / bc1;
          const double sh = s[i] / bc2;
          v[i] -= lr_ * mh / (std::sqrt(sh) + 1.0e-8);
        }
        break;
      }
    }
  }
}

double mse_loss(const TensorGrid& pred, const TensorGrid& target, TensorGrid* dpred) {
  if (pred.shape() != target.shape()) throw InputError("loss: shape mismatch");
  const double n = static_cast<double>(pred.size());
  double acc = 0.0;
  if (dpred) *dpred = TensorGrid(pred.shape());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
    if (dpred) (*dpred)[i] = 2.0 * d / n;
  }
  return acc / n;
}

void make_batch(const std::vector<Sample>& samples, const std::vector<std::size_t>& indices,
                TensorGrid* batch, TensorGrid* labels) {
  if (indices.empty()) throw InputError("empty batch");
  const auto& shape = samples[indices[0]].channels.shape();
  const std::size_t per = samples[indices[0]].channels.size();
  *batch = TensorGrid({indices.size(), shape[0], shape[1], shape[2]});
  *labels = TensorGrid({indices.size(), 2});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const Sample& s = samples[indices[b]];
    if (s.channels.size() != per) throw InputError("samples disagree on image shape");
    std::copy(s.channels.data(), s.channels.data() + per, batch->data() + b * per);
    labels->at2(b, 0) = s.label_x;
    labels->at2(b, 1) = s.label_y;
  }
}

TrainResult train_model(AeslNet& net, Optimizer& opt, const std::vector<Sample>& samples,
                        const HyperParams& hp, std::uint64_t seed, std::size_t threads) {
  hp.validate();
  if (samples.empty()) throw InputError("training dataset is empty");
  net.set_threads(threads);

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  result.loss_history.reserve(hp.epochs);

  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    // Fisher-Yates with a per-epoch stream of the training seed.
    Rng shuffle_rng(mix_seed(seed, 0x5a5a0000ULL + epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      TensorGrid batch, labels;
      make_batch(samples, idx, &batch, &labels);

      net.zero_grads();
      const TensorGrid pred = net.forward(batch, true);
      TensorGrid dpred;
      const double loss = mse_loss(pred, labels, &dpred);
      if (!std::isfinite(loss))
        throw NumericalError("training diverged: loss is not finite at epoch " +
                             std::to_string(epoch));
      net.backward(dpred);
      opt.step(net.parameters());

      epoch_loss += loss * static_cast<double>(idx.size());
      seen += idx.size();
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(seen));
  }
  return result;
}

double evaluate_mse(AeslNet& net, const std::vector<Sample>& samples) {
  if (samples.empty()) throw InputError("evaluation dataset is empty");
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  TensorGrid batch, labels;
  make_batch(samples, idx, &batch, &labels);
  const TensorGrid pred = net.forward(batch, false);
  return mse_loss(pred, labels, nullptr);
}

std::pair<double, double> predict(AeslNet& net, const Sample& sample, const PlateSpec& plate) {
  TensorGrid batch({1, sample.channels.extent(0), sample.channels.extent(1),
                    sample.channels.extent(2)});
  std::copy(sample.channels.data(), sample.channels.data() + sample.channels.size(),
            batch.data());
  const TensorGrid out = net.forward(batch, false);
  return {out.at2(0, 0) * plate.width_mm, out.at2(0, 1) * plate.height_mm};
}

}  // namespace aeloc
