#include "hardi/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "hardi/errors.hpp"
#include "hardi/parallel.hpp"
#include "hardi/random.hpp"

namespace hardi {

namespace {

constexpr int kCsf = 0;
constexpr int kGm = 1;
constexpr int kWmsf = 2;
constexpr int kWmcf = 3;

double ratio(std::size_t numerator, std::size_t denominator) {
  return denominator == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace

void FitnessWeights::validate() const {
  require(alpha >= 0.0 && beta >= 0.0 && gamma_w >= 0.0, "fitness weights must be >= 0");
}

std::size_t EvalReport::total() const {
  std::size_t sum = 0;
  for (const auto& row : confusion) sum += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return sum;
}

EvalReport report_from_confusion(const ConfusionMatrix& c, const FitnessWeights& weights) {
  weights.validate();
  EvalReport r;
  r.confusion = c;
  std::size_t wm = 0, nwm = 0;
  for (int t = 0; t < kNumClasses; ++t) {
    const auto row = std::accumulate(c[t].begin(), c[t].end(), std::size_t{0});
    (is_white_matter(t) ? wm : nwm) += row;
  }
  const std::size_t missed = c[kWmsf][kCsf] + c[kWmsf][kGm] + c[kWmcf][kCsf] + c[kWmcf][kGm];
  const std::size_t exchanged = c[kWmsf][kWmcf] + c[kWmcf][kWmsf];
  const std::size_t imagined = c[kCsf][kWmsf] + c[kCsf][kWmcf] + c[kGm][kWmsf] + c[kGm][kWmcf];
  r.wm_degenerate = wm == 0;
  r.nwm_degenerate = nwm == 0;
  r.mwmr = ratio(missed, wm);
  r.ewmr = ratio(exchanged, wm);
  r.iwmr = ratio(imagined, nwm);
  r.fitness = weights.alpha * r.mwmr + weights.beta * r.ewmr + weights.gamma_w * r.iwmr;

  std::size_t wrong = 0;
  for (int t = 0; t < kNumClasses; ++t) {
    for (int p = 0; p < kNumClasses; ++p) {
      if (t != p) wrong += c[t][p];
    }
  }
  const std::size_t total = wm + nwm;
  r.global_error = ratio(wrong, total);
  r.merged_global_error = ratio(wrong - c[kCsf][kGm] - c[kGm][kCsf], total);
  return r;
}

EvalReport compute_metrics(std::span<const int> truth, std::span<const int> predicted,
                           const FitnessWeights& weights) {
  require(truth.size() == predicted.size(), "truth and prediction lengths differ");
  require(!truth.empty(), "cannot evaluate an empty prediction set");
  ConfusionMatrix c{};
  for (std::size_t s = 0; s < truth.size(); ++s) {
    require(truth[s] >= 0 && truth[s] < kNumClasses && predicted[s] >= 0 &&
                predicted[s] < kNumClasses,
            "label outside {0..3}");
    ++c[static_cast<std::size_t>(truth[s])][static_cast<std::size_t>(predicted[s])];
  }
  return report_from_confusion(c, weights);
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& row : r.confusion) confusion.push_back(std::vector<std::size_t>(row.begin(), row.end()));
  return {{"confusion", confusion},
          {"mwmr", r.mwmr},
          {"ewmr", r.ewmr},
          {"iwmr", r.iwmr},
          {"fitness", r.fitness},
          {"global_error", r.global_error},
          {"merged_global_error", r.merged_global_error},
          {"wm_degenerate", r.wm_degenerate},
          {"nwm_degenerate", r.nwm_degenerate},
          {"samples", r.total()}};
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  char line[160];
  out << "confusion (rows = truth, cols = predicted)\n";
  std::snprintf(line, sizeof line, "%-6s %8s %8s %8s %8s\n", "", "CSF", "GM", "WMSF", "WMCF");
  out << line;
  for (int t = 0; t < kNumClasses; ++t) {
    std::snprintf(line, sizeof line, "%-6s %8zu %8zu %8zu %8zu\n",
                  std::string(class_name(static_cast<TissueClass>(t))).c_str(), r.confusion[t][0],
                  r.confusion[t][1], r.confusion[t][2], r.confusion[t][3]);
    out << line;
  }
  std::snprintf(line, sizeof line,
                "MWMR    %.6f\nEWMR    %.6f\nIWMR    %.6f\nfitness %.6f\n"
                "error   %.6f\nmerged  %.6f\n",
                r.mwmr, r.ewmr, r.iwmr, r.fitness, r.global_error, r.merged_global_error);
  out << line;
  return out.str();
}

std::vector<std::size_t> canonical_ranks(const Dataset& dataset) {
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool has_provenance = dataset.provenance.size() == dataset.size();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (has_provenance) {
      const auto& pa = dataset.provenance[a];
      const auto& pb = dataset.provenance[b];
      if (pa.slice != pb.slice) return pa.slice < pb.slice;
      if (pa.y != pb.y) return pa.y < pb.y;
      if (pa.x != pb.x) return pa.x < pb.x;
    }
    const auto sa = dataset.sample(a);
    const auto sb = dataset.sample(b);
    if (!std::equal(sa.begin(), sa.end(), sb.begin())) {
      return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
    }
    if (dataset.labels[a] != dataset.labels[b]) return dataset.labels[a] < dataset.labels[b];
    return a < b;
  });
  std::vector<std::size_t> rank(dataset.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

Folds stratified_folds(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  dataset.validate();
  require(k >= 2, "need at least 2 folds");
  const auto hist = dataset.histogram();
  for (int c = 0; c < kNumClasses; ++c) {
    if (hist[c] > 0 && hist[c] < k) {
      throw ValidationError("class " + std::string(class_name(static_cast<TissueClass>(c))) +
                            " has " + std::to_string(hist[c]) + " samples, fewer than " +
                            std::to_string(k) + " folds");
    }
  }
  const auto rank = canonical_ranks(dataset);
  std::vector<std::size_t> by_rank(dataset.size());
  for (std::size_t s = 0; s < dataset.size(); ++s) by_rank[rank[s]] = s;

  Folds folds(k);
  std::size_t next_fold = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> members;
    for (auto s : by_rank) {
      if (dataset.labels[s] == c) members.push_back(s);
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    std::shuffle(members.begin(), members.end(), rng);
    for (auto s : members) {
      folds[next_fold].push_back(s);
      next_fold = (next_fold + 1) % k;
    }
  }
  for (auto& fold : folds) {
    std::sort(fold.begin(), fold.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
  }
  return folds;
}

CrossValidationResult cross_validate_folds(const Dataset& dataset, const Folds& folds,
                                           const SvmConfig& config, const FitnessWeights& weights,
                                           std::size_t threads) {
  dataset.validate();
  const auto rank = canonical_ranks(dataset);
  std::vector<int> predictions(dataset.size(), -1);
  parallel_for(folds.size(), threads, [&](std::size_t f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end(),
              [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
    const auto model = train_svm(dataset.subset(train_idx), config);
    const auto test = dataset.subset(folds[f]);
    const auto predicted = predict_batch(model, test);
    for (std::size_t t = 0; t < folds[f].size(); ++t) predictions[folds[f][t]] = predicted[t];
  });
  for (int p : predictions) {
    require(p >= 0, "folds do not cover every sample exactly once");
  }
  CrossValidationResult out;
  out.report = compute_metrics(dataset.labels, predictions, weights);
  out.predictions = std::move(predictions);
  return out;
}

EvalReport cross_validate(const Dataset& dataset, const SvmConfig& config,
                          const FitnessWeights& weights, std::size_t k, std::uint64_t seed,
                          std::size_t threads) {
  return cross_validate_folds(dataset, stratified_folds(dataset, k, seed), config, weights, threads)
      .report;
}

double estimate_classification_time(double voxels, double per_run_seconds) {
  require(voxels >= 0.0, "voxel count must be >= 0");
  return per_run_seconds * voxels / (3.0 * 64.0 * 64.0);
}

}  // namespace hardi
