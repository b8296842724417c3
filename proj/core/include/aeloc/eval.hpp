#ifndef AELOC_EVAL_HPP
#define AELOC_EVAL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aeloc/model.hpp"
#include "aeloc/train.hpp"

namespace aeloc {

struct FoldAssignment {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> fold_of;  // event id -> fold index

  std::vector<std::vector<std::string>> folds() const;
};

// Uniform random size-balanced partition of event ids (fold sizes differ by
// at most one), deterministic per seed.
FoldAssignment kfold_split(const std::vector<std::string>& event_ids, std::size_t k,
                           std::uint64_t seed);

// Group-aware variant: ids sharing a group key always land in one fold.
// Balances group counts across folds; used by cross-validation so the
// repeats of one grid point never leak across the train/test boundary.
FoldAssignment kfold_split_grouped(const std::vector<std::pair<std::string, std::string>>& id_group,
                                   std::size_t k, std::uint64_t seed);

struct CrossValidationResult {
  std::vector<double> fold_losses;
  double mean_loss = 0.0;
  FoldAssignment assignment;
};

struct CvConfig {
  std::size_t k = 5;
  std::size_t threads = 1;
};

// Grouped k-fold cross validation: train a fresh model per fold (all other
// folds) and record the held-out MSE. A diverged fold contributes +inf.
// Sample group keys are the exact label coordinates, which repeats of one
// grid point share bit-for-bit.
CrossValidationResult cross_validate(const std::vector<Sample>& samples, const ModelConfig& mc,
                                     const HyperParams& hp, const CvConfig& cv,
                                     std::uint64_t seed);

struct EventError {
  std::string event_id;
  double true_x_mm = 0.0, true_y_mm = 0.0;
  double pred_x_mm = 0.0, pred_y_mm = 0.0;
  double error_mm = 0.0;
};

struct ErrorReport {
  std::vector<EventError> events;
  double mean_mm = 0.0;
  double std_dev_mm = 0.0;
  double ci95_half_width_mm = 0.0;  // 1.96 * std / sqrt(n)
  double max_mm = 0.0;
  std::size_t out_of_plate_count = 0;
  // Set to the grid spacing when max error < spacing / 2.
  std::optional<double> resolution_mm;
};

ErrorReport error_report(AeslNet& net, const std::vector<Sample>& samples,
                         const PlateSpec& plate, double grid_spacing_mm);

struct AblationConfig {
  std::size_t seeds = 5;
  CvConfig cv;
};

struct AblationPair {
  std::uint64_t seed = 0;
  double parallel_loss = 0.0;
  double shared_loss = 0.0;
};

struct AblationResult {
  std::vector<AblationPair> pairs;
  double median_ratio = 0.0;  // shared / parallel
  std::size_t parallel_param_count = 0;
  std::size_t shared_param_count = 0;
};

// Paired comparison of the parallel-branch model against the weight-tied
// (shared-branch) variant under identical widths and training budgets.
AblationResult ablation_compare(const std::vector<Sample>& samples, const ModelConfig& mc,
                                const HyperParams& hp, const AblationConfig& cfg,
                                std::uint64_t seed0);

double median(std::vector<double> v);

}  // namespace aeloc

#endif  // AELOC_EVAL_HPP
