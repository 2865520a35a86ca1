#include "hardi/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hardi/errors.hpp"
#include "hardi/random.hpp"

namespace hardi {

namespace {

std::vector<double> power_grid(int lo, int hi) {
  std::vector<double> grid;
  for (int e = lo; e <= hi; e += 2) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

void check_aligned(const KindDatasets& inputs) {
  require(!inputs.empty(), "fusion needs at least one feature kind");
  const auto& labels = inputs.front().second.labels;
  for (const auto& [kind, ds] : inputs) {
    ds.validate();
    require(ds.n == feature_dimension(kind),
            "dataset for " + std::string(to_string(kind)) + " has the wrong dimension");
    require(ds.labels == labels, "fusion datasets must share labels and sample order");
  }
}

Dataset codes_dataset(std::span<const int> codes, std::size_t width, std::span<const int> labels) {
  Dataset ds;
  ds.n = width;
  ds.values.assign(codes.begin(), codes.end());
  ds.labels.assign(labels.begin(), labels.end());
  return ds;
}

}  // namespace

std::vector<double> default_c_grid() { return power_grid(-5, 9); }
std::vector<double> default_gamma_grid() { return power_grid(-15, 3); }

Dataset stratified_subsample(const Dataset& dataset, std::size_t max_samples, std::uint64_t seed) {
  if (max_samples == 0 || dataset.size() <= max_samples) return dataset;
  const auto rank = canonical_ranks(dataset);
  std::vector<std::size_t> by_rank(dataset.size());
  for (std::size_t s = 0; s < dataset.size(); ++s) by_rank[rank[s]] = s;
  const auto hist = dataset.histogram();
  std::vector<std::size_t> keep;
  const double fraction = static_cast<double>(max_samples) / static_cast<double>(dataset.size());
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> members;
    for (auto s : by_rank) {
      if (dataset.labels[s] == c) members.push_back(s);
    }
    Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(c)));
    std::shuffle(members.begin(), members.end(), rng);
    const auto quota = std::min(members.size(),
        std::max<std::size_t>(static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(hist[c]))),
                              std::min<std::size_t>(members.size(), 10)));
    keep.insert(keep.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota));
  }
  std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
  return dataset.subset(keep);
}

GridSearchResult grid_search(const Dataset& train, const GridSearchOptions& options) {
  require(!options.c_grid.empty() && !options.gamma_grid.empty(), "grid search needs non-empty grids");
  const Dataset tuning = stratified_subsample(train, options.max_samples, options.seed);
  const auto folds = stratified_folds(tuning, options.folds, options.seed);

  std::vector<double> cs = options.c_grid;
  std::vector<double> gammas = options.gamma_grid;
  std::sort(cs.begin(), cs.end());
  std::sort(gammas.begin(), gammas.end());

  GridSearchResult result;
  result.best_error = std::numeric_limits<double>::infinity();
  for (double c : cs) {
    for (double g : gammas) {
      SvmConfig config = options.base;
      config.C = c;
      config.gamma = g;
      double error = 1.0;
      try {
        error = cross_validate_folds(tuning, folds, config, FitnessWeights{}).report.global_error;
      } catch (const Error&) {
      }
      result.table.push_back({c, g, error});
      if (error < result.best_error) {
        result.best_error = error;
        result.best = config;
      }
    }
  }
  return result;
}

int majority_vote(std::span<const int> codes) {
  require(!codes.empty(), "majority vote needs at least one code");
  std::array<int, kNumClasses> votes{};
  for (int c : codes) {
    require(c >= 0 && c < kNumClasses, "vote code outside {0..3}");
    ++votes[static_cast<std::size_t>(c)];
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

FusionTraining train_fusion(const KindDatasets& inputs, const FusionOptions& options) {
  check_aligned(inputs);
  const auto& labels = inputs.front().second.labels;
  const std::size_t count = labels.size();
  const std::size_t width = inputs.size();

  FusionTraining out;
  out.model.mode = options.mode;
  out.stacking_folds = stratified_folds(inputs.front().second, options.stacking_folds, options.seed);
  out.stage2_inputs.assign(count * width, -1);

  for (std::size_t k = 0; k < width; ++k) {
    const auto& [kind, ds] = inputs[k];
    const auto tuned = grid_search(ds, options.grid);
    out.model.kinds.push_back(kind);
    out.model.stage1.push_back(train_svm(ds, tuned.best));
    if (options.mode == FusionMode::kSvm) {
      const auto oof = cross_validate_folds(ds, out.stacking_folds, tuned.best, FitnessWeights{});
      for (std::size_t s = 0; s < count; ++s) out.stage2_inputs[s * width + k] = oof.predictions[s];
    }
  }
  if (options.mode == FusionMode::kSvm) {
    out.model.stage2 = train_svm(codes_dataset(out.stage2_inputs, width, labels), options.stage2);
  }
  return out;
}

int predict_fusion(const FusionModel& model, const std::map<FeatureKind, std::vector<double>>& x) {
  std::vector<int> codes;
  codes.reserve(model.kinds.size());
  for (std::size_t k = 0; k < model.kinds.size(); ++k) {
    const auto it = x.find(model.kinds[k]);
    if (it == x.end()) {
      throw ValidationError("missing feature vector for kind " + std::string(to_string(model.kinds[k])));
    }
    codes.push_back(predict(model.stage1[k], it->second));
  }
  if (model.mode == FusionMode::kVote) return majority_vote(codes);
  const std::vector<double> as_values(codes.begin(), codes.end());
  return predict(*model.stage2, as_values);
}

std::vector<int> predict_fusion_batch(const FusionModel& model, const KindDatasets& inputs) {
  check_aligned(inputs);
  const std::size_t count = inputs.front().second.size();
  const std::size_t width = model.kinds.size();
  std::vector<int> codes(count * width);
  for (std::size_t k = 0; k < width; ++k) {
    const auto it = std::find_if(inputs.begin(), inputs.end(),
                                 [&](const auto& p) { return p.first == model.kinds[k]; });
    if (it == inputs.end()) {
      throw ValidationError("missing dataset for kind " + std::string(to_string(model.kinds[k])));
    }
    const auto predicted = predict_batch(model.stage1[k], it->second);
    for (std::size_t s = 0; s < count; ++s) codes[s * width + k] = predicted[s];
  }
  std::vector<int> out(count);
  if (model.mode == FusionMode::kVote) {
    for (std::size_t s = 0; s < count; ++s) {
      out[s] = majority_vote(std::span<const int>(codes).subspan(s * width, width));
    }
    return out;
  }
  return predict_batch(*model.stage2, codes_dataset(codes, width, inputs.front().second.labels));
}

CrossValidationResult cross_validate_fusion(const KindDatasets& inputs, const FusionOptions& options,
                                            const FitnessWeights& weights, std::size_t k,
                                            std::uint64_t seed) {
  check_aligned(inputs);
  const auto& reference = inputs.front().second;
  const auto folds = stratified_folds(reference, k, seed);
  const auto rank = canonical_ranks(reference);
  std::vector<int> predictions(reference.size(), -1);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end(),
              [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
    KindDatasets train, test;
    for (const auto& [kind, ds] : inputs) {
      train.emplace_back(kind, ds.subset(train_idx));
      test.emplace_back(kind, ds.subset(folds[f]));
    }
    const auto model = train_fusion(train, options).model;
    const auto predicted = predict_fusion_batch(model, test);
    for (std::size_t t = 0; t < folds[f].size(); ++t) predictions[folds[f][t]] = predicted[t];
  }
  CrossValidationResult out;
  out.report = compute_metrics(reference.labels, predictions, weights);
  out.predictions = std::move(predictions);
  return out;
}

}  // namespace hardi
