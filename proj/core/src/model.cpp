#include "aeloc/model.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <set>
#include <thread>

#include "aeloc/errors.hpp"
#include "aeloc/io.hpp"

namespace aeloc {

std::size_t ModelConfig::branch_flat() const {
  std::size_t h = image_h, w = image_w;
  for (std::size_t i = 0; i < branch_channels.size(); ++i) {
    h /= 2;
    w /= 2;
  }
  return branch_channels.back() * h * w;
}

namespace {

Sequential make_branch(const ModelConfig& cfg, std::size_t index, Rng& init_rng,
                       Rng* dropout_rng, Sequential* share_from) {
  Sequential s;
  const std::string prefix = "branch" + std::to_string(index);
  std::size_t c_in = 1;
  std::size_t li = 0;
  for (std::size_t stage = 0; stage < cfg.branch_channels.size(); ++stage) {
    const std::size_t c_out = cfg.branch_channels[stage];
    const std::string name = prefix + ".conv" + std::to_string(stage + 1);
    if (share_from) {
      auto& src = dynamic_cast<Conv2d&>(share_from->layer(li));
      s.add(std::make_unique<Conv2d>(src, name));
    } else {
      s.add(std::make_unique<Conv2d>(c_in, c_out, 3, 1, 1, init_rng, name));
    }
    ++li;
    s.add(std::make_unique<Relu>());
    ++li;
    s.add(std::make_unique<MaxPool2d>());
    ++li;
    c_in = c_out;
  }
  s.add(std::make_unique<Dropout>(cfg.dropout_rate, dropout_rng));
  ++li;
  s.add(std::make_unique<Flatten>());
  ++li;
  if (share_from) {
    auto& src = dynamic_cast<FullyConnected&>(share_from->layer(li));
    s.add(std::make_unique<FullyConnected>(src, prefix + ".fc"));
  } else {
    s.add(std::make_unique<FullyConnected>(cfg.branch_flat(), cfg.branch_fc_out, init_rng,
                                           prefix + ".fc"));
  }
  ++li;
  s.add(std::make_unique<Relu>());
  return s;
}

}  // namespace

AeslNet::AeslNet(const ModelConfig& cfg)
    : cfg_(cfg), dropout_rng_(mix_seed(cfg.init_seed, hash_string("dropout"))) {
  if (cfg_.branch_channels.empty()) throw ConfigError("branch_channels must be nonempty");
  std::size_t h = cfg_.image_h, w = cfg_.image_w;
  for (std::size_t i = 0; i < cfg_.branch_channels.size(); ++i) {
    if (h % 2 != 0 || w % 2 != 0)
      throw ConfigError("image size must halve cleanly through every pool stage");
    h /= 2;
    w /= 2;
  }

  // Each branch draws from its own seed stream, so branch parameter sets
  // are disjoint and independently initialized.
  for (std::size_t b = 0; b < 4; ++b) {
    Rng init(mix_seed(cfg_.init_seed, b));
    if (cfg_.shared_branch && b > 0)
      branches_[b] = make_branch(cfg_, b, init, &dropout_rng_, &branches_[0]);
    else
      branches_[b] = make_branch(cfg_, b, init, &dropout_rng_, nullptr);
  }

  Rng head_rng(mix_seed(cfg_.init_seed, hash_string("head")));
  const std::size_t concat_width = 4 * cfg_.branch_fc_out;
  auto bn = std::make_unique<BatchNorm1d>(concat_width, "head.bn");
  head_bn_ = bn.get();
  head_.add(std::move(bn));
  std::size_t in = concat_width;
  for (std::size_t i = 0; i < cfg_.head_widths.size(); ++i) {
    head_.add(std::make_unique<FullyConnected>(in, cfg_.head_widths[i], head_rng,
                                               "head.fc" + std::to_string(i + 1)));
    head_.add(std::make_unique<Relu>());
    in = cfg_.head_widths[i];
  }
  head_.add(std::make_unique<FullyConnected>(in, 2, head_rng,
                                             "head.fc" + std::to_string(cfg_.head_widths.size() + 1)));
}

TensorGrid AeslNet::forward(const TensorGrid& batch, bool train) {
  if (batch.rank() != 4 || batch.extent(1) != 4 || batch.extent(2) != cfg_.image_h ||
      batch.extent(3) != cfg_.image_w)
    throw InputError("model expects input (B x 4 x " + std::to_string(cfg_.image_h) + " x " +
                     std::to_string(cfg_.image_w) + "), got " + batch.shape_str());
  const std::size_t B = batch.extent(0);
  const std::size_t plane = cfg_.image_h * cfg_.image_w;

  std::array<TensorGrid, 4> chans;
  for (std::size_t c = 0; c < 4; ++c) {
    chans[c] = TensorGrid({B, 1, cfg_.image_h, cfg_.image_w});
    for (std::size_t b = 0; b < B; ++b)
      std::copy(batch.data() + (b * 4 + c) * plane, batch.data() + (b * 4 + c + 1) * plane,
                chans[c].data() + b * plane);
  }

  // Dropout draws must not depend on scheduling: in train mode each branch
  // dropout consumes from the shared stream in branch order, so the
  // parallel path pre-splits the stream deterministically. With dropout
  // active we run serially to keep the draw order exact.
  const bool parallel = threads_ > 1 && !cfg_.shared_branch && (!train || cfg_.dropout_rate <= 0.0);
  if (parallel) {
    std::array<std::thread, 4> pool;
    for (std::size_t c = 0; c < 4; ++c)
      pool[c] = std::thread(
          [&, c] { branch_out_[c] = branches_[c].forward(chans[c], train); });
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t c = 0; c < 4; ++c)
      branch_out_[c] = branches_[c].forward(chans[c], train);
  }

  std::vector<const TensorGrid*> parts;
  for (auto& t : branch_out_) parts.push_back(&t);
  const TensorGrid merged = concat_features(parts);
  last_batch_ = B;
  have_forward_ = true;
  return head_.forward(merged, train);
}

void AeslNet::backward(const TensorGrid& dpred) {
  if (!have_forward_) throw std::logic_error("backward called before forward");
  const TensorGrid dmerged = head_.backward(dpred);
  const std::vector<std::size_t> widths(4, cfg_.branch_fc_out);
  std::vector<TensorGrid> dparts = split_features(dmerged, widths);

  // Shared-branch grads accumulate into one tensor set, so that variant
  // stays serial.
  if (threads_ > 1 && !cfg_.shared_branch) {
    std::array<std::thread, 4> pool;
    for (std::size_t c = 0; c < 4; ++c)
      pool[c] = std::thread([&, c] { branches_[c].backward(dparts[c]); });
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t c = 0; c < 4; ++c) branches_[c].backward(dparts[c]);
  }
  have_forward_ = false;
}

std::vector<Param> AeslNet::parameters() {
  std::vector<Param> out;
  std::set<const TensorGrid*> seen;
  for (auto& b : branches_)
    for (auto& p : b.params())
      if (seen.insert(p.value.get()).second) out.push_back(p);
  for (auto& p : head_.params())
    if (seen.insert(p.value.get()).second) out.push_back(p);
  return out;
}

void AeslNet::zero_grads() {
  for (auto& p : parameters()) p.grad->fill(0.0);
}

std::size_t AeslNet::parameter_count() {
  std::size_t n = 0;
  for (auto& p : parameters()) n += p.value->size();
  return n;
}

std::vector<std::pair<std::string, TensorGrid*>> AeslNet::state_tensors() {
  return {{"state.head.bn.running_mean", &head_bn_->running_mean()},
          {"state.head.bn.running_var", &head_bn_->running_var()}};
}

namespace {

void write_tensor(std::ostream& os, const std::string& name, const TensorGrid& t) {
  detail::put_u16(os, static_cast<std::uint16_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  os.put(static_cast<char>(t.rank()));
  for (std::size_t d = 0; d < t.rank(); ++d) detail::put_u64(os, t.extent(d));
  for (std::size_t i = 0; i < t.size(); ++i) detail::put_f64(os, t[i]);
}

TensorGrid read_tensor(std::istream& is, std::string& name) {
  const std::uint16_t len = detail::get_u16(is);
  name.resize(len);
  is.read(name.data(), len);
  const int rank = is.get();
  if (rank < 0) throw InputError("unexpected end of checkpoint");
  std::vector<std::size_t> shape(static_cast<std::size_t>(rank));
  for (auto& d : shape) d = detail::get_u64(is);
  TensorGrid t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = detail::get_f64(is);
  return t;
}

TensorGrid from_scalars(std::initializer_list<double> v) {
  TensorGrid t({v.size()});
  std::size_t i = 0;
  for (double x : v) t[i++] = x;
  return t;
}

}  // namespace

void save_checkpoint(AeslNet& net, const std::map<std::string, TensorGrid>& optimizer_state,
                     const std::string& path) {
  std::vector<std::pair<std::string, const TensorGrid*>> entries;
  std::vector<TensorGrid> owned;

  const ModelConfig& c = net.config();
  owned.push_back(from_scalars({static_cast<double>(c.image_h), static_cast<double>(c.image_w)}));
  {
    TensorGrid t({c.branch_channels.size()});
    for (std::size_t i = 0; i < c.branch_channels.size(); ++i)
      t[i] = static_cast<double>(c.branch_channels[i]);
    owned.push_back(std::move(t));
  }
  owned.push_back(from_scalars({static_cast<double>(c.branch_fc_out)}));
  {
    TensorGrid t({c.head_widths.size()});
    for (std::size_t i = 0; i < c.head_widths.size(); ++i)
      t[i] = static_cast<double>(c.head_widths[i]);
    owned.push_back(std::move(t));
  }
  owned.push_back(from_scalars({c.dropout_rate}));
  owned.push_back(from_scalars({c.shared_branch ? 1.0 : 0.0}));
  owned.push_back(from_scalars({std::bit_cast<double>(net.dropout_rng_state())}));

  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open checkpoint for writing: " + path);
  os.write("AESL", 4);
  detail::put_u32(os, 1);

  const char* meta_names[] = {"meta.image",    "meta.branch_channels", "meta.branch_fc",
                              "meta.head",     "meta.dropout",         "meta.shared",
                              "meta.rng_state"};

  std::uint32_t count = 7;
  auto params = net.parameters();
  count += static_cast<std::uint32_t>(params.size());
  count += static_cast<std::uint32_t>(net.state_tensors().size());
  count += static_cast<std::uint32_t>(optimizer_state.size());
  detail::put_u32(os, count);

  for (std::size_t i = 0; i < owned.size(); ++i) write_tensor(os, meta_names[i], owned[i]);
  for (auto& p : params) write_tensor(os, "param." + p.name, *p.value);
  for (auto& [name, t] : net.state_tensors()) write_tensor(os, name, *t);
  for (auto& [name, t] : optimizer_state) write_tensor(os, "opt." + name, t);
  if (!os) throw InputError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open checkpoint: " + path);
  detail::expect_magic(is, "AESL", "checkpoint");
  if (detail::get_u32(is) != 1) throw InputError("unsupported checkpoint version");
  const std::uint32_t count = detail::get_u32(is);

  std::map<std::string, TensorGrid> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name;
    TensorGrid t = read_tensor(is, name);
    tensors.emplace(std::move(name), std::move(t));
  }

  auto need = [&](const std::string& n) -> TensorGrid& {
    auto it = tensors.find(n);
    if (it == tensors.end()) throw InputError("checkpoint missing tensor: " + n);
    return it->second;
  };

  ModelConfig cfg;
  {
    TensorGrid& img = need("meta.image");
    cfg.image_h = static_cast<std::size_t>(img[0]);
    cfg.image_w = static_cast<std::size_t>(img[1]);
    TensorGrid& bc = need("meta.branch_channels");
    cfg.branch_channels.clear();
    for (std::size_t i = 0; i < bc.size(); ++i)
      cfg.branch_channels.push_back(static_cast<std::size_t>(bc[i]));
    cfg.branch_fc_out = static_cast<std::size_t>(need("meta.branch_fc")[0]);
    TensorGrid& hw = need("meta.head");
    cfg.head_widths.clear();
    for (std::size_t i = 0; i < hw.size(); ++i)
      cfg.head_widths.push_back(static_cast<std::size_t>(hw[i]));
    cfg.dropout_rate = need("meta.dropout")[0];
    cfg.shared_branch = need("meta.shared")[0] != 0.0;
  }

  Checkpoint ck;
  ck.config = cfg;
  ck.net = std::make_unique<AeslNet>(cfg);
  ck.net->set_dropout_rng_state(std::bit_cast<std::uint64_t>(need("meta.rng_state")[0]));

  for (auto& p : ck.net->parameters()) {
    TensorGrid& stored = need("param." + p.name);
    if (stored.shape() != p.value->shape())
      throw InputError("checkpoint tensor shape mismatch for " + p.name);
    *p.value = stored;
  }
  for (auto& [name, t] : ck.net->state_tensors()) {
    TensorGrid& stored = need(name);
    if (stored.shape() != t->shape())
      throw InputError("checkpoint tensor shape mismatch for " + name);
    *t = stored;
  }
  for (auto& [name, t] : tensors)
    if (name.rfind("opt.", 0) == 0) ck.optimizer_state.emplace(name.substr(4), t);
  return ck;
}

}  // namespace aeloc
