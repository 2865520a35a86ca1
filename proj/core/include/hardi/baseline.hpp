#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "hardi/evaluation.hpp"
#include "hardi/spatial_filter.hpp"
#include "hardi/svm.hpp"

namespace hardi {

inline constexpr std::array<FeatureKind, 7> kFusionKinds = {
    FeatureKind::kSh4, FeatureKind::kSh4Ri, FeatureKind::kSh8, FeatureKind::kSh8Ri,
    FeatureKind::kEig, FeatureKind::kOdf4,  FeatureKind::kOdf8};

// C in {2^-5, 2^-3, ..., 2^9}.
std::vector<double> default_c_grid();
// gamma in {2^-15, 2^-13, ..., 2^3}.
std::vector<double> default_gamma_grid();

struct GridSearchOptions {
  std::vector<double> c_grid = default_c_grid();
  std::vector<double> gamma_grid = default_gamma_grid();
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  // Tune on a stratified subsample of at most this many samples; 0 = all.
  std::size_t max_samples = 0;
  // Tolerance, cache and iteration cap for every trial.
  SvmConfig base;
};

struct GridPoint {
  double C;
  double gamma;
  double error;
};

struct GridSearchResult {
  SvmConfig best;
  double best_error = 0.0;
  std::vector<GridPoint> table;
};

// Picks the (C, gamma) with the lowest pooled k-fold global error; ties go to
// the smaller C, then the smaller gamma. Trials whose training fails score 1.
GridSearchResult grid_search(const Dataset& train, const GridSearchOptions& options);

// Deterministic class-stratified subsample of at most `max_samples` samples,
// in canonical order.
Dataset stratified_subsample(const Dataset& dataset, std::size_t max_samples, std::uint64_t seed);

enum class FusionMode { kSvm, kVote };

struct FusionOptions {
  FusionMode mode = FusionMode::kSvm;
  GridSearchOptions grid;
  // Folds used to produce out-of-fold stage-1 predictions for stage 2.
  std::size_t stacking_folds = 5;
  std::uint64_t seed = 42;
  // Config of the stage-2 SVM.
  SvmConfig stage2;
};

struct FusionModel {
  std::vector<FeatureKind> kinds;
  std::vector<SvmModel> stage1;
  std::optional<SvmModel> stage2;
  FusionMode mode = FusionMode::kSvm;
};

// One labelled dataset per feature kind; all share labels and sample order.
using KindDatasets = std::vector<std::pair<FeatureKind, Dataset>>;

struct FusionTraining {
  FusionModel model;
  // Out-of-fold stage-1 codes per sample, row-major (samples x kinds).
  std::vector<int> stage2_inputs;
  Folds stacking_folds;
};

FusionTraining train_fusion(const KindDatasets& inputs, const FusionOptions& options);

// Majority vote, ties to the lowest class code.
int majority_vote(std::span<const int> codes);

int predict_fusion(const FusionModel& model, const std::map<FeatureKind, std::vector<double>>& x);
std::vector<int> predict_fusion_batch(const FusionModel& model, const KindDatasets& inputs);

// Outer k-fold evaluation of the whole fusion pipeline (tuning included).
CrossValidationResult cross_validate_fusion(const KindDatasets& inputs, const FusionOptions& options,
                                            const FitnessWeights& weights, std::size_t k = 6,
                                            std::uint64_t seed = 42);

}  // namespace hardi
