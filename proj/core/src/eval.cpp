#include "aeloc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aeloc/errors.hpp"
#include "aeloc/rng.hpp"

namespace aeloc {

std::vector<std::vector<std::string>> FoldAssignment::folds() const {
  std::vector<std::vector<std::string>> out(k);
  for (const auto& [id, f] : fold_of) out[f].push_back(id);
  return out;
}

FoldAssignment kfold_split(const std::vector<std::string>& event_ids, std::size_t k,
                           std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be >= 2");
  if (event_ids.size() < k) throw ConfigError("fewer events than folds");

  std::vector<std::string> ids = event_ids;
  std::sort(ids.begin(), ids.end());  // input-order independence
  Rng rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.next_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(ids[i - 1], ids[j]);
  }

  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i) fa.fold_of[ids[i]] = i % k;
  return fa;
}

FoldAssignment kfold_split_grouped(
    const std::vector<std::pair<std::string, std::string>>& id_group, std::size_t k,
    std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be >= 2");

  std::vector<std::string> groups;
  for (const auto& [id, g] : id_group)
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  if (groups.size() < k) throw ConfigError("fewer groups than folds");

  std::sort(groups.begin(), groups.end());
  Rng rng(seed);
  for (std::size_t i = groups.size(); i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.next_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(groups[i - 1], groups[j]);
  }
  std::map<std::string, std::size_t> fold_of_group;
  for (std::size_t i = 0; i < groups.size(); ++i) fold_of_group[groups[i]] = i % k;

  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  for (const auto& [id, g] : id_group) fa.fold_of[id] = fold_of_group[g];
  return fa;
}

namespace {

std::string group_key(const Sample& s) {
  // Repeats of one grid point share their label bit-for-bit.
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g", s.label_x, s.label_y);
  return buf;
}

}  // namespace

CrossValidationResult cross_validate(const std::vector<Sample>& samples, const ModelConfig& mc,
                                     const HyperParams& hp, const CvConfig& cv,
                                     std::uint64_t seed) {
  if (samples.empty()) throw InputError("cross_validate: no samples");

  std::vector<std::pair<std::string, std::string>> id_group;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::string id = samples[i].event_id.empty() ? "s" + std::to_string(i) : samples[i].event_id;
    id_group.emplace_back(id, group_key(samples[i]));
    index_of[id] = i;
  }

  CrossValidationResult result;
  result.assignment = kfold_split_grouped(id_group, cv.k, mix_seed(seed, hash_string("kfold")));

  for (std::size_t f = 0; f < cv.k; ++f) {
    std::vector<Sample> train_set, test_set;
    for (const auto& [id, fold] : result.assignment.fold_of) {
      const Sample& s = samples[index_of[id]];
      (fold == f ? test_set : train_set).push_back(s);
    }
    if (test_set.empty() || train_set.empty())
      throw ConfigError("cross_validate: degenerate fold split");

    ModelConfig fold_mc = mc;
    fold_mc.init_seed = mix_seed(seed, 0xf01d0000ULL + f);
    double loss;
    try {
      AeslNet net(fold_mc);
      Optimizer opt(hp.optimizer, hp.learning_rate);
      train_model(net, opt, train_set, hp, mix_seed(seed, 0x7e570000ULL + f), cv.threads);
      net.set_threads(cv.threads);
      loss = evaluate_mse(net, test_set);
    } catch (const NumericalError&) {
      loss = std::numeric_limits<double>::infinity();
    }
    result.fold_losses.push_back(loss);
  }

  double sum = 0.0;
  for (double v : result.fold_losses) sum += v;
  result.mean_loss = sum / static_cast<double>(result.fold_losses.size());
  return result;
}

ErrorReport error_report(AeslNet& net, const std::vector<Sample>& samples,
                         const PlateSpec& plate, double grid_spacing_mm) {
  if (samples.empty()) throw InputError("error_report: no samples");

  ErrorReport rep;
  for (const Sample& s : samples) {
    const auto [px, py] = predict(net, s, plate);
    EventError e;
    e.event_id = s.event_id;
    e.true_x_mm = s.label_x * plate.width_mm;
    e.true_y_mm = s.label_y * plate.height_mm;
    e.pred_x_mm = px;
    e.pred_y_mm = py;
    e.error_mm = std::hypot(px - e.true_x_mm, py - e.true_y_mm);
    if (px < 0.0 || px > plate.width_mm || py < 0.0 || py > plate.height_mm)
      ++rep.out_of_plate_count;
    rep.events.push_back(std::move(e));
  }

  const double n = static_cast<double>(rep.events.size());
  double sum = 0.0;
  for (const auto& e : rep.events) {
    sum += e.error_mm;
    rep.max_mm = std::max(rep.max_mm, e.error_mm);
  }
  rep.mean_mm = sum / n;
  double ss = 0.0;
  for (const auto& e : rep.events) ss += (e.error_mm - rep.mean_mm) * (e.error_mm - rep.mean_mm);
  rep.std_dev_mm = rep.events.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  rep.ci95_half_width_mm = 1.96 * rep.std_dev_mm / std::sqrt(n);
  if (rep.max_mm < grid_spacing_mm / 2.0) rep.resolution_mm = grid_spacing_mm;
  return rep;
}

double median(std::vector<double> v) {
  if (v.empty()) throw InputError("median of empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

AblationResult ablation_compare(const std::vector<Sample>& samples, const ModelConfig& mc,
                                const HyperParams& hp, const AblationConfig& cfg,
                                std::uint64_t seed0) {
  if (cfg.seeds < 1) throw ConfigError("ablation needs at least one seed");

  AblationResult result;
  {
    ModelConfig pc = mc;
    pc.shared_branch = false;
    ModelConfig sc = mc;
    sc.shared_branch = true;
    AeslNet pnet(pc), snet(sc);
    result.parallel_param_count = pnet.parameter_count();
    result.shared_param_count = snet.parameter_count();
  }

  std::vector<double> ratios;
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    const std::uint64_t seed = mix_seed(seed0, 0xab1a0000ULL + s);
    ModelConfig pc = mc;
    pc.shared_branch = false;
    const CrossValidationResult pr = cross_validate(samples, pc, hp, cfg.cv, seed);
    ModelConfig sc = mc;
    sc.shared_branch = true;
    const CrossValidationResult sr = cross_validate(samples, sc, hp, cfg.cv, seed);
    result.pairs.push_back({seed, pr.mean_loss, sr.mean_loss});
    ratios.push_back(sr.mean_loss / pr.mean_loss);
  }
  result.median_ratio = median(ratios);
  return result;
}

}  // namespace aeloc
