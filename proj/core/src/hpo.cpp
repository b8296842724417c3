#include "aeloc/hpo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "aeloc/errors.hpp"
#include "aeloc/rng.hpp"

namespace aeloc {

namespace {

double halton(std::size_t index, std::size_t base) {
  double f = 1.0, r = 0.0;
  std::size_t i = index + 1;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

double frac(double x) { return x - std::floor(x); }

OptimizerKind kind_from_index(std::size_t i) {
  switch (i) {
    case 0: return OptimizerKind::sgd;
    case 1: return OptimizerKind::rmsprop;
    default: return OptimizerKind::adam;
  }
}

std::size_t index_of_kind(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::sgd: return 0;
    case OptimizerKind::rmsprop: return 1;
    case OptimizerKind::adam: return 2;
  }
  return 0;
}

}  // namespace

Eigen::VectorXd SearchSpace::encode(OptimizerKind opt, std::size_t batch_size) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(kDims);
  x[index_of_kind(opt)] = 1.0;
  x[3] = static_cast<double>(batch_size - batch_min) / static_cast<double>(batch_max - batch_min);
  return x;
}

std::pair<OptimizerKind, std::size_t> SearchSpace::decode(const Eigen::VectorXd& x) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (x[static_cast<Eigen::Index>(i)] > x[static_cast<Eigen::Index>(best)]) best = i;
  const double span = static_cast<double>(batch_max - batch_min);
  const long b = std::lround(static_cast<double>(batch_min) + x[3] * span);
  const std::size_t bs = static_cast<std::size_t>(
      std::clamp<long>(b, static_cast<long>(batch_min), static_cast<long>(batch_max)));
  return {kind_from_index(best), bs};
}

double expected_improvement(double mu, double sigma, double f_best, double xi) {
  if (sigma < 0.0) throw InputError("expected_improvement: sigma must be >= 0");
  if (sigma == 0.0) return 0.0;
  const double imp = f_best - mu - xi;
  const double z = imp / sigma;
  const double ei = imp * norm_cdf(z) + sigma * norm_pdf(z);
  return std::max(0.0, ei);
}

std::optional<ProposeResult> propose_next(
    const GPSurrogate& gp, const SearchSpace& space, double xi, std::uint64_t seed,
    const std::vector<std::pair<OptimizerKind, std::size_t>>& evaluated) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [opt, bs] : evaluated) seen.insert({index_of_kind(opt), bs});
  if (seen.size() >= space.cardinality()) return std::nullopt;

  double f_best = std::numeric_limits<double>::infinity();
  // f_best is the incumbent posterior-mean-at-observed minimum; use the
  // smallest observed mean prediction over evaluated points.
  for (const auto& [opt, bs] : evaluated) {
    double mu;
    gp.predict(space.encode(opt, bs), &mu, nullptr);
    f_best = std::min(f_best, mu);
  }

  const double shift1 = frac(static_cast<double>(mix_seed(seed, 1)) * 0x1.0p-64);
  const double shift2 = frac(static_cast<double>(mix_seed(seed, 2)) * 0x1.0p-64);

  auto score = [&](std::size_t opt_idx, double bs_cont) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(SearchSpace::kDims);
    x[static_cast<Eigen::Index>(opt_idx)] = 1.0;
    x[3] = bs_cont;
    double mu, var;
    gp.predict(x, &mu, &var);
    return expected_improvement(mu, std::sqrt(var), f_best, xi);
  };

  struct Cand {
    std::size_t opt;
    double bs;
    double ei;
  };
  std::vector<Cand> cands;
  cands.reserve(2048);
  for (std::size_t i = 0; i < 2048; ++i) {
    const double u1 = frac(halton(i, 2) + shift1);
    const double u2 = frac(halton(i, 3) + shift2);
    const std::size_t opt_idx = std::min<std::size_t>(2, static_cast<std::size_t>(u1 * 3.0));
    cands.push_back({opt_idx, u2, score(opt_idx, u2)});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& a, const Cand& b) { return a.ei > b.ei; });

  // Local refinement from the best 8: neighbor batch sizes and optimizer
  // swaps, three sweeps each.
  const double span = static_cast<double>(space.batch_max - space.batch_min);
  Cand best = cands.front();
  const std::size_t top = std::min<std::size_t>(8, cands.size());
  for (std::size_t c = 0; c < top; ++c) {
    Cand cur = cands[c];
    for (int round = 0; round < 3; ++round) {
      Cand improved = cur;
      for (const double delta_bs : {-4.0, -2.0, -1.0, 1.0, 2.0, 4.0}) {
        const double nb = std::clamp(cur.bs + delta_bs / span, 0.0, 1.0);
        const double ei = score(cur.opt, nb);
        if (ei > improved.ei) improved = {cur.opt, nb, ei};
      }
      for (std::size_t o = 0; o < 3; ++o) {
        if (o == cur.opt) continue;
        const double ei = score(o, cur.bs);
        if (ei > improved.ei) improved = {o, cur.bs, ei};
      }
      if (improved.ei <= cur.ei) break;
      cur = improved;
    }
    if (cur.ei > best.ei) best = cur;
  }

  auto decoded = space.decode([&] {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(SearchSpace::kDims);
    x[static_cast<Eigen::Index>(best.opt)] = 1.0;
    x[3] = best.bs;
    return x;
  }());

  // Never re-propose an evaluated point: walk outward to the nearest
  // unevaluated batch size, preferring the proposed optimizer.
  const std::size_t opt0 = index_of_kind(decoded.first);
  for (std::size_t opt_off = 0; opt_off < 3; ++opt_off) {
    const std::size_t opt_idx = (opt0 + opt_off) % 3;
    for (std::size_t r = 0; r <= space.batch_max - space.batch_min; ++r) {
      for (const int sgn : {+1, -1}) {
        const long bs = static_cast<long>(decoded.second) + sgn * static_cast<long>(r);
        if (bs < static_cast<long>(space.batch_min) || bs > static_cast<long>(space.batch_max))
          continue;
        if (!seen.count({opt_idx, static_cast<std::size_t>(bs)}))
          return ProposeResult{kind_from_index(opt_idx), static_cast<std::size_t>(bs)};
        if (r == 0) break;  // +0 and -0 are the same point
      }
    }
  }
  return std::nullopt;
}

BoResult optimize(const Objective& objective, const HyperParams& base, const BoConfig& cfg,
                  std::uint64_t seed) {
  if (cfg.iterations < 1) throw ConfigError("BO needs at least one iteration");
  if (cfg.init_count < 1) throw ConfigError("BO needs at least one initial trial");

  BoResult result;
  std::vector<std::pair<OptimizerKind, std::size_t>> evaluated;

  const double shift1 = frac(static_cast<double>(mix_seed(seed, 11)) * 0x1.0p-64);
  const double shift2 = frac(static_cast<double>(mix_seed(seed, 12)) * 0x1.0p-64);

  auto run_trial = [&](OptimizerKind opt, std::size_t bs) {
    HyperParams hp = base;
    hp.optimizer = opt;
    hp.batch_size = bs;
    TrialRecord rec;
    rec.iteration = result.trials.size();
    rec.hyperparams = hp;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      rec.fold_losses = objective(hp);
      double sum = 0.0;
      for (double f : rec.fold_losses) sum += f;
      rec.mean_loss = rec.fold_losses.empty()
                          ? std::numeric_limits<double>::infinity()
                          : sum / static_cast<double>(rec.fold_losses.size());
    } catch (const NumericalError&) {
      rec.fold_losses.clear();
      rec.mean_loss = std::numeric_limits<double>::infinity();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    evaluated.emplace_back(opt, bs);
    result.trials.push_back(std::move(rec));
  };

  // Quasi-random initialization.
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::size_t halton_i = 0;
  while (result.trials.size() < std::min(cfg.init_count, cfg.iterations) &&
         seen.size() < cfg.space.cardinality()) {
    const double u1 = frac(halton(halton_i, 2) + shift1);
    const double u2 = frac(halton(halton_i, 3) + shift2);
    ++halton_i;
    const std::size_t opt_idx = std::min<std::size_t>(2, static_cast<std::size_t>(u1 * 3.0));
    const std::size_t bs =
        cfg.space.batch_min +
        static_cast<std::size_t>(std::lround(
            u2 * static_cast<double>(cfg.space.batch_max - cfg.space.batch_min)));
    if (!seen.insert({opt_idx, bs}).second) continue;
    run_trial(kind_from_index(opt_idx), bs);
  }

  // EI-driven trials.
  while (result.trials.size() < cfg.iterations) {
    std::vector<double> finite;
    for (const auto& t : result.trials)
      if (std::isfinite(t.mean_loss)) finite.push_back(t.mean_loss);

    std::optional<ProposeResult> prop;
    if (!finite.empty()) {
      // Failed trials enter the GP as a pessimistic but finite value.
      const double worst = *std::max_element(finite.begin(), finite.end());
      const double best = *std::min_element(finite.begin(), finite.end());
      const double sentinel = worst + 3.0 * std::max(worst - best, 1.0);

      Eigen::MatrixXd X(result.trials.size(), SearchSpace::kDims);
      Eigen::VectorXd y(result.trials.size());
      for (std::size_t i = 0; i < result.trials.size(); ++i) {
        const auto& t = result.trials[i];
        X.row(static_cast<Eigen::Index>(i)) =
            cfg.space.encode(t.hyperparams.optimizer, t.hyperparams.batch_size).transpose();
        y[static_cast<Eigen::Index>(i)] = std::isfinite(t.mean_loss) ? t.mean_loss : sentinel;
      }
      const GPSurrogate gp = GPSurrogate::fit(X, y, cfg.kernel);
      prop = propose_next(gp, cfg.space, cfg.xi, mix_seed(seed, 100 + result.trials.size()),
                          evaluated);
    } else {
      // No finite observation yet; keep sampling quasi-randomly.
      while (seen.size() < cfg.space.cardinality()) {
        const double u1 = frac(halton(halton_i, 2) + shift1);
        const double u2 = frac(halton(halton_i, 3) + shift2);
        ++halton_i;
        const std::size_t opt_idx = std::min<std::size_t>(2, static_cast<std::size_t>(u1 * 3.0));
        const std::size_t bs =
            cfg.space.batch_min +
            static_cast<std::size_t>(std::lround(
                u2 * static_cast<double>(cfg.space.batch_max - cfg.space.batch_min)));
        if (seen.insert({opt_idx, bs}).second) {
          prop = ProposeResult{kind_from_index(opt_idx), bs};
          break;
        }
      }
    }
    if (!prop) break;  // space exhausted
    seen.insert({index_of_kind(prop->optimizer), prop->batch_size});
    run_trial(prop->optimizer, prop->batch_size);
  }

  result.best_index = 0;
  for (std::size_t i = 1; i < result.trials.size(); ++i)
    if (result.trials[i].mean_loss < result.trials[result.best_index].mean_loss)
      result.best_index = i;
  return result;
}

}  // namespace aeloc
