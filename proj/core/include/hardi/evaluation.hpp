#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hardi/spatial_filter.hpp"
#include "hardi/svm.hpp"

namespace hardi {

// Weights of the error score alpha*MWMR + beta*EWMR + gamma_w*IWMR.
struct FitnessWeights {
  double alpha = 1.5;
  double beta = 1.0;
  double gamma_w = 2.0;

  void validate() const;
};

using ConfusionMatrix = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

// Rows are ground truth, columns are predictions.
struct EvalReport {
  ConfusionMatrix confusion{};
  // WM-truth voxels predicted CSF or GM, over WM-truth voxels.
  double mwmr = 0.0;
  // WMSF<->WMCF swaps, over WM-truth voxels.
  double ewmr = 0.0;
  // N-WM-truth voxels predicted WMSF or WMCF, over N-WM-truth voxels.
  double iwmr = 0.0;
  double fitness = 0.0;
  double global_error = 0.0;
  // As global_error, but CSF<->GM confusions count as correct.
  double merged_global_error = 0.0;
  // Set when the corresponding denominator is zero; its ratios are then 0.
  bool wm_degenerate = false;
  bool nwm_degenerate = false;

  std::size_t total() const;
};

EvalReport report_from_confusion(const ConfusionMatrix& confusion, const FitnessWeights& weights);
EvalReport compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                           const FitnessWeights& weights = {});

nlohmann::json to_json(const EvalReport& report);
// Fixed-format text table (confusion matrix, ratios, fitness, errors).
std::string format_report(const EvalReport& report);

using Folds = std::vector<std::vector<std::size_t>>;

// Per class, samples are put in a canonical order (provenance, then feature
// values), shuffled with a class-specific stream of `seed` and dealt round
// robin, continuing where the previous class stopped. Folds therefore depend
// on sample identity, not on position in the dataset.
Folds stratified_folds(const Dataset& dataset, std::size_t k, std::uint64_t seed);

struct CrossValidationResult {
  EvalReport report;
  // Out-of-fold prediction for every sample, indexed like the dataset.
  std::vector<int> predictions;
};

// Trains on k-1 folds, predicts the held-out one, pools all predictions.
// Training sets are assembled in canonical sample order.
CrossValidationResult cross_validate_folds(const Dataset& dataset, const Folds& folds,
                                           const SvmConfig& config, const FitnessWeights& weights,
                                           std::size_t threads = 1);

EvalReport cross_validate(const Dataset& dataset, const SvmConfig& config,
                          const FitnessWeights& weights, std::size_t k = 6,
                          std::uint64_t seed = 42, std::size_t threads = 1);

// Canonical rank of each sample (see stratified_folds).
std::vector<std::size_t> canonical_ranks(const Dataset& dataset);

// Classification time extrapolated from one 3 x 64 x 64 run taking
// `per_run_seconds`: per_run_seconds * voxels / (3 * 64^2).
double estimate_classification_time(double voxels, double per_run_seconds = 1.5);

}  // namespace hardi
