#include "aeloc/layers.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

#include "aeloc/errors.hpp"

namespace aeloc {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

void xavier_init(TensorGrid& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  if (fan_in < 1 || fan_out < 1) throw ConfigError("fan-in/fan-out must be >= 1");
  const double sigma = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = sigma * rng.next_gaussian();
}

void Layer::require_forward(bool have) const {
  if (!have) throw std::logic_error("backward called before forward");
}

namespace {

Param make_param(const std::string& name, std::vector<std::size_t> shape) {
  Param p;
  p.name = name;
  p.value = std::make_shared<TensorGrid>(shape);
  p.grad = std::make_shared<TensorGrid>(shape);
  return p;
}

std::size_t conv_out(std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  return (in + 2 * pad - k) / stride + 1;
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t c_in, std::size_t c_out, std::size_t kernel, std::size_t stride,
               std::size_t pad, Rng& rng, const std::string& name)
    : c_in_(c_in), c_out_(c_out), k_(kernel), stride_(stride), pad_(pad) {
  weight_ = make_param(name + ".weight", {c_out, c_in, k_, k_});
  bias_ = make_param(name + ".bias", {c_out});
  xavier_init(*weight_.value, c_in * k_ * k_, c_out * k_ * k_, rng);
}

Conv2d::Conv2d(const Conv2d& o, const std::string&)
    : c_in_(o.c_in_), c_out_(o.c_out_), k_(o.k_), stride_(o.stride_), pad_(o.pad_),
      weight_(o.weight_), bias_(o.bias_) {}

TensorGrid Conv2d::forward(const TensorGrid& x, bool) {
  if (x.rank() != 4 || x.extent(1) != c_in_)
    throw InputError("conv2d: input shape mismatch, got " + x.shape_str());
  const std::size_t B = x.extent(0), H = x.extent(2), W = x.extent(3);
  const std::size_t Ho = conv_out(H, k_, stride_, pad_);
  const std::size_t Wo = conv_out(W, k_, stride_, pad_);
  const std::size_t patch = c_in_ * k_ * k_;
  const std::size_t ncols = B * Ho * Wo;

  cols_ = TensorGrid({patch, ncols});
  double* cd = cols_.data();
  const double* xd = x.data();
  for (std::size_t c = 0; c < c_in_; ++c) {
    for (std::size_t ky = 0; ky < k_; ++ky) {
      for (std::size_t kx = 0; kx < k_; ++kx) {
        double* row = cd + ((c * k_ + ky) * k_ + kx) * ncols;
        for (std::size_t b = 0; b < B; ++b) {
          const double* xc = xd + (b * c_in_ + c) * H * W;
          for (std::size_t oy = 0; oy < Ho; ++oy) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * stride_ + ky) - static_cast<std::ptrdiff_t>(pad_);
            double* dst = row + (b * Ho + oy) * Wo;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) {
              for (std::size_t ox = 0; ox < Wo; ++ox) dst[ox] = 0.0;
              continue;
            }
            const double* src = xc + static_cast<std::size_t>(iy) * W;
            for (std::size_t ox = 0; ox < Wo; ++ox) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride_ + kx) - static_cast<std::ptrdiff_t>(pad_);
              dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W))
                            ? 0.0
                            : src[static_cast<std::size_t>(ix)];
            }
          }
        }
      }
    }
  }

  TensorGrid y({B, c_out_, Ho, Wo});
  // y_mat (C_out x ncols) = W_mat (C_out x patch) * cols, but laid out per
  // batch element: stage into a (C_out x ncols) buffer first.
  TensorGrid y_mat({c_out_, ncols});
  {
    CMapRM wm(weight_.value->data(), static_cast<Eigen::Index>(c_out_),
              static_cast<Eigen::Index>(patch));
    CMapRM cm(cols_.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(ncols));
    MapRM ym(y_mat.data(), static_cast<Eigen::Index>(c_out_), static_cast<Eigen::Index>(ncols));
    ym.noalias() = wm * cm;
  }
  const double* bias = bias_.value->data();
  double* yd = y.data();
  const std::size_t plane = Ho * Wo;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t co = 0; co < c_out_; ++co) {
      const double* srcrow = y_mat.data() + co * ncols + b * plane;
      double* dst = yd + (b * c_out_ + co) * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[p] = srcrow[p] + bias[co];
    }

  x_shape_ = x.shape();
  have_forward_ = true;
  return y;
}

TensorGrid Conv2d::backward(const TensorGrid& dy) {
  require_forward(have_forward_);
  const std::size_t B = x_shape_[0], H = x_shape_[2], W = x_shape_[3];
  const std::size_t Ho = dy.extent(2), Wo = dy.extent(3);
  const std::size_t patch = c_in_ * k_ * k_;
  const std::size_t ncols = B * Ho * Wo;
  const std::size_t plane = Ho * Wo;

  // Regroup dy into (C_out x ncols).
  TensorGrid dy_mat({c_out_, ncols});
  {
    const double* dyd = dy.data();
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t co = 0; co < c_out_; ++co) {
        const double* src = dyd + (b * c_out_ + co) * plane;
        double* dst = dy_mat.data() + co * ncols + b * plane;
        for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p];
      }
  }

  CMapRM dym(dy_mat.data(), static_cast<Eigen::Index>(c_out_), static_cast<Eigen::Index>(ncols));
  CMapRM cm(cols_.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(ncols));
  CMapRM wm(weight_.value->data(), static_cast<Eigen::Index>(c_out_),
            static_cast<Eigen::Index>(patch));

  {
    MapRM dwm(weight_.grad->data(), static_cast<Eigen::Index>(c_out_),
              static_cast<Eigen::Index>(patch));
    dwm.noalias() += dym * cm.transpose();
    double* db = bias_.grad->data();
    for (std::size_t co = 0; co < c_out_; ++co)
      db[co] += dym.row(static_cast<Eigen::Index>(co)).sum();
  }

  TensorGrid dcols({patch, ncols});
  {
    MapRM dcm(dcols.data(), static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(ncols));
    dcm.noalias() = wm.transpose() * dym;
  }

  // col2im scatter-add.
  TensorGrid dx(x_shape_);
  double* dxd = dx.data();
  const double* dcd = dcols.data();
  for (std::size_t c = 0; c < c_in_; ++c) {
    for (std::size_t ky = 0; ky < k_; ++ky) {
      for (std::size_t kx = 0; kx < k_; ++kx) {
        const double* row = dcd + ((c * k_ + ky) * k_ + kx) * ncols;
        for (std::size_t b = 0; b < B; ++b) {
          double* xc = dxd + (b * c_in_ + c) * H * W;
          for (std::size_t oy = 0; oy < Ho; ++oy) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * stride_ + ky) - static_cast<std::ptrdiff_t>(pad_);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
            const double* src = row + (b * Ho + oy) * Wo;
            double* dst = xc + static_cast<std::size_t>(iy) * W;
            for (std::size_t ox = 0; ox < Wo; ++ox) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * stride_ + kx) - static_cast<std::ptrdiff_t>(pad_);
              if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(W))
                dst[static_cast<std::size_t>(ix)] += src[ox];
            }
          }
        }
      }
    }
  }
  have_forward_ = false;
  return dx;
}

// ------------------------------------------------------------- MaxPool2d

TensorGrid MaxPool2d::forward(const TensorGrid& x, bool) {
  if (x.rank() != 4) throw InputError("maxpool2d: expected rank-4 input");
  const std::size_t B = x.extent(0), C = x.extent(1), H = x.extent(2), W = x.extent(3);
  const std::size_t Ho = H / 2, Wo = W / 2;
  TensorGrid y({B, C, Ho, Wo});
  argmax_.assign(y.size(), 0);
  const double* xd = x.data();
  double* yd = y.data();
  std::size_t out_i = 0;
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    const double* pl = xd + bc * H * W;
    for (std::size_t oy = 0; oy < Ho; ++oy) {
      for (std::size_t ox = 0; ox < Wo; ++ox, ++out_i) {
        const std::size_t base = (2 * oy) * W + 2 * ox;
        std::size_t best = base;
        double bv = pl[base];
        const std::size_t candidates[3] = {base + 1, base + W, base + W + 1};
        for (std::size_t c : candidates) {
          if (pl[c] > bv) {
            bv = pl[c];
            best = c;
          }
        }
        yd[out_i] = bv;
        argmax_[out_i] = static_cast<std::uint32_t>(bc * H * W + best);
      }
    }
  }
  x_shape_ = x.shape();
  have_forward_ = true;
  return y;
}

TensorGrid MaxPool2d::backward(const TensorGrid& dy) {
  require_forward(have_forward_);
  TensorGrid dx(x_shape_);
  const double* dyd = dy.data();
  for (std::size_t i = 0; i < dy.size(); ++i) dx[argmax_[i]] += dyd[i];
  have_forward_ = false;
  return dx;
}

// ------------------------------------------------------------------ Relu

TensorGrid Relu::forward(const TensorGrid& x, bool) {
  TensorGrid y = x;
  mask_.assign(x.size(), false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0)
      mask_[i] = true;
    else
      y[i] = 0.0;
  }
  have_forward_ = true;
  return y;
}

TensorGrid Relu::backward(const TensorGrid& dy) {
  require_forward(have_forward_);
  TensorGrid dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!mask_[i]) dx[i] = 0.0;
  have_forward_ = false;
  return dx;
}

// --------------------------------------------------------------- Dropout

TensorGrid Dropout::forward(const TensorGrid& x, bool train) {
  if (!train || rate_ <= 0.0) {
    mask_.assign(x.size(), 1.0);
    have_forward_ = true;
    return x;
  }
  const double keep = 1.0 - rate_;
  mask_.resize(x.size());
  TensorGrid y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask_[i] = (rng_->next_uniform() < keep) ? 1.0 / keep : 0.0;
    y[i] *= mask_[i];
  }
  have_forward_ = true;
  return y;
}

TensorGrid Dropout::backward(const TensorGrid& dy) {
  require_forward(have_forward_);
  TensorGrid dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask_[i];
  have_forward_ = false;
  return dx;
}

// --------------------------------------------------------------- Flatten

TensorGrid Flatten::forward(const TensorGrid& x, bool) {
  x_shape_ = x.shape();
  TensorGrid y = x;
  y.reshape({x.extent(0), x.size() / x.extent(0)});
  have_forward_ = true;
  return y;
}

TensorGrid Flatten::backward(const TensorGrid& dy) {
  require_forward(have_forward_);
  TensorGrid dx = dy;
  dx.reshape(x_shape_);
  have_forward_ = false;
  return dx;
}

// -------------------------------------------------------- FullyConnected

FullyConnected::FullyConnected(std::size_t in, std::size_t out, Rng& rng, const std::string& name)
    : in_(in), out_(out) {
  weight_ = make_param(name + ".weight", {out, in});
  bias_ = make_param(name + ".bias", {out});
  xavier_init(*weight_.value, in, out, rng);
}

FullyConnected::FullyConnected(const FullyConnected& o, const std::string&)
    : in_(o.in_), out_(o.out_), weight_(o.weight_), bias_(o.bias_) {}

TensorGrid FullyConnected::forward(const TensorGrid& x, bool) {
  if (x.rank() != 2 || x.extent(1) != in_)
    throw InputError("fully_connected: input shape mismatch, got " + x.shape_str());
  const std::size_t B = x.extent(0);
  TensorGrid y({B, out_});
  CMapRM xm(x.data(), static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(in_));
  CMapRM wm(weight_.value->data(), static_cast<Eigen::Index>(out_),
            static_cast<Eigen::Index>(in_));
  MapRM ym(y.data(), static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(out_));
  ym.noalias() = xm * wm.transpose();
  const double* b = bias_.value->data();
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t c = 0; c < out_; ++c) y.at2(r, c) += b[c];
  x_saved_ = x;
  have_forward_ = true;
  return y;
}

TensorGrid FullyConnected::backward(const TensorGrid& dy) {
  require_forward(have_forward_);
  const std::size_t B = dy.extent(0);
  CMapRM dym(dy.data(), static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(out_));
  CMapRM xm(x_saved_.data(), static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(in_));
  CMapRM wm(weight_.value->data(), static_cast<Eigen::Index>(out_),
            static_cast<Eigen::Index>(in_));

  {
    MapRM dwm(weight_.grad->data(), static_cast<Eigen::Index>(out_),
              static_cast<Eigen::Index>(in_));
    dwm.noalias() += dym.transpose() * xm;
    double* db = bias_.grad->data();
    for (std::size_t c = 0; c < out_; ++c)
      db[c] += dym.col(static_cast<Eigen::Index>(c)).sum();
  }

  TensorGrid dx({B, in_});
  MapRM dxm(dx.data(), static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(in_));
  dxm.noalias() = dym * wm;
  have_forward_ = false;
  return dx;
}

// ----------------------------------------------------------- BatchNorm1d

BatchNorm1d::BatchNorm1d(std::size_t features, const std::string& name)
    : features_(features),
      running_mean_({features}),
      running_var_({features}) {
  gamma_ = make_param(name + ".gamma", {features});
  beta_ = make_param(name + ".beta", {features});
  gamma_.value->fill(1.0);
}

TensorGrid BatchNorm1d::forward(const TensorGrid& x, bool train) {
  if (x.rank() != 2 || x.extent(1) != features_)
    throw InputError("batch_norm: input shape mismatch, got " + x.shape_str());
  const std::size_t B = x.extent(0);
  TensorGrid y({B, features_});
  inv_std_.assign(features_, 0.0);
  train_mode_ = train;

  const double* g = gamma_.value->data();
  const double* be = beta_.value->data();

  if (train) {
    x_hat_ = TensorGrid({B, features_});
    for (std::size_t f = 0; f < features_; ++f) {
      double mean = 0.0;
      for (std::size_t b = 0; b < B; ++b) mean += x.at2(b, f);
      mean /= static_cast<double>(B);
      double var = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const double d = x.at2(b, f) - mean;
        var += d * d;
      }
      var /= static_cast<double>(B);
      const double istd = 1.0 / std::sqrt(var + kEpsilon);
      inv_std_[f] = istd;
      for (std::size_t b = 0; b < B; ++b) {
        const double xh = (x.at2(b, f) - mean) * istd;
        x_hat_.at2(b, f) = xh;
        y.at2(b, f) = g[f] * xh + be[f];
      }
      running_mean_[f] = (1.0 - kMomentum) * running_mean_[f] + kMomentum * mean;
      running_var_[f] = (1.0 - kMomentum) * running_var_[f] + kMomentum * var;
    }
  } else {
    for (std::size_t f = 0; f < features_; ++f) {
      const double istd = 1.0 / std::sqrt(running_var_[f] + kEpsilon);
      inv_std_[f] = istd;
      for (std::size_t b = 0; b < B; ++b)
        y.at2(b, f) = g[f] * (x.at2(b, f) - running_mean_[f]) * istd + be[f];
    }
  }
  have_forward_ = true;
  return y;
}

TensorGrid BatchNorm1d::backward(const TensorGrid& dy) {
  require_forward(have_forward_);
  const std::size_t B = dy.extent(0);
  TensorGrid dx({B, features_});
  const double* g = gamma_.value->data();
  double* dg = gamma_.grad->data();
  double* db = beta_.grad->data();

  if (train_mode_) {
    for (std::size_t f = 0; f < features_; ++f) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        sum_dy += dy.at2(b, f);
        sum_dy_xhat += dy.at2(b, f) * x_hat_.at2(b, f);
      }
      dg[f] += sum_dy_xhat;
      db[f] += sum_dy;
      const double nb = static_cast<double>(B);
      for (std::size_t b = 0; b < B; ++b) {
        dx.at2(b, f) = g[f] * inv_std_[f] *
                       (dy.at2(b, f) - sum_dy / nb - x_hat_.at2(b, f) * sum_dy_xhat / nb);
      }
    }
  } else {
    for (std::size_t f = 0; f < features_; ++f) {
      double sum_dy = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        sum_dy += dy.at2(b, f);
        dx.at2(b, f) = dy.at2(b, f) * g[f] * inv_std_[f];
      }
      db[f] += sum_dy;
      // x_hat is not cached in eval mode; gamma gradient needs train mode.
    }
  }
  have_forward_ = false;
  return dx;
}

// ---------------------------------------------------------------- concat

TensorGrid concat_features(const std::vector<const TensorGrid*>& parts) {
  if (parts.empty()) throw InputError("concat of zero parts");
  const std::size_t B = parts[0]->extent(0);
  std::size_t total = 0;
  for (const TensorGrid* p : parts) {
    if (p->rank() != 2 || p->extent(0) != B)
      throw InputError("concat: parts must share the batch dimension");
    total += p->extent(1);
  }
  TensorGrid y({B, total});
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t off = 0;
    for (const TensorGrid* p : parts) {
      const std::size_t w = p->extent(1);
      for (std::size_t c = 0; c < w; ++c) y.at2(b, off + c) = p->at2(b, c);
      off += w;
    }
  }
  return y;
}

std::vector<TensorGrid> split_features(const TensorGrid& dy,
                                       const std::vector<std::size_t>& widths) {
  std::vector<TensorGrid> out;
  const std::size_t B = dy.extent(0);
  std::size_t off = 0;
  for (std::size_t w : widths) {
    TensorGrid part({B, w});
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < w; ++c) part.at2(b, c) = dy.at2(b, off + c);
    off += w;
    out.push_back(std::move(part));
  }
  if (off != dy.extent(1)) throw InputError("split widths do not cover the feature axis");
  return out;
}

// ------------------------------------------------------------ Sequential

TensorGrid Sequential::forward(const TensorGrid& x, bool train) {
  TensorGrid cur = x;
  for (auto& l : layers_) cur = l->forward(cur, train);
  return cur;
}

TensorGrid Sequential::backward(const TensorGrid& dy) {
  TensorGrid cur = dy;
  for (std::size_t i = layers_.size(); i-- > 0;) cur = layers_[i]->backward(cur);
  return cur;
}

std::vector<Param> Sequential::params() {
  std::vector<Param> out;
  for (auto& l : layers_)
    for (auto& p : l->params()) out.push_back(p);
  return out;
}

}  // namespace aeloc
