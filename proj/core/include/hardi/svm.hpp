#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "hardi/spatial_filter.hpp"

namespace hardi {

struct SvmConfig {
  double C = 1.0;
  // Gaussian kernel width; <= 0 means 1/n, resolved at training time.
  double gamma = 0.0;
  // Stopping threshold on the maximal KKT violation.
  double tolerance = 1e-3;
  // Kernel evaluations allowed per binary problem before giving up.
  std::size_t max_kernel_evaluations = 1'000'000'000;
  // Kernel column cache per binary problem.
  std::size_t cache_megabytes = 200;

  void validate() const;
  double resolved_gamma(std::size_t n) const { return gamma > 0.0 ? gamma : 1.0 / static_cast<double>(n); }
};

// z-score statistics learned on a training set.
struct Normalizer {
  std::vector<double> mu;
  std::vector<double> sigma;

  std::size_t n() const { return mu.size(); }
  void apply(std::span<const double> in, std::span<double> out) const;
  std::vector<double> apply_all(std::span<const double> values) const;
};

// Population mean and standard deviation per feature; sigma below 1e-12 is
// replaced by 1 so constant columns normalize to zero.
Normalizer fit_normalizer(const Dataset& train);

// Result of one two-class SMO solve over all training points.
struct BinarySolution {
  std::vector<double> alpha;
  // Decision function f(x) = sum alpha_i y_i K(x_i, x) + bias.
  double bias = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::size_t kernel_evaluations = 0;
};

// Soft-margin dual with Gaussian kernel K(a, b) = exp(-gamma |a - b|^2):
//   min 1/2 a'Qa - e'a  s.t. y'a = 0, 0 <= a_i <= C,  Q_ij = y_i y_j K_ij.
// `points` is row-major (rows x n); labels are +1/-1. Working pair: the
// maximal KKT violator i, then the partner j with the largest second-order
// decrease. Throws NumericalError when the kernel evaluation cap is hit.
BinarySolution solve_binary(std::span<const double> points, std::size_t n,
                            std::span<const int> labels, double C, double gamma,
                            double tolerance, std::size_t max_kernel_evaluations,
                            std::size_t cache_megabytes = 200);

// Evaluates the dual objective 1/2 a'Qa - e'a directly.
double dual_objective(std::span<const double> points, std::size_t n, std::span<const int> labels,
                      std::span<const double> alpha, double gamma);

struct BinaryClassifier {
  int positive = 0;  // class voted when f(x) > 0
  int negative = 1;  // class voted otherwise
  // Indices into SvmModel::support_vectors.
  std::vector<std::size_t> sv_index;
  // alpha_i * y_i per support vector.
  std::vector<double> coef;
  double bias = 0.0;
  double objective = 0.0;
  // One class of the pair was absent in training: always votes constant_vote.
  bool degenerate = false;
  int constant_vote = 0;
};

// One-against-one Gaussian SVM over the four tissue classes with its own
// normalizer. Support vectors are stored normalized and shared across the
// six binaries.
struct SvmModel {
  Normalizer normalizer;
  SvmConfig config;
  double gamma = 0.0;
  std::size_t n = 0;
  std::vector<double> support_vectors;
  std::vector<BinaryClassifier> binaries;

  std::size_t n_support_vectors() const { return n == 0 ? 0 : support_vectors.size() / n; }
  std::span<const double> support_vector(std::size_t k) const {
    return {support_vectors.data() + k * n, n};
  }
};

// Trains the six pairwise binaries on raw features (the normalizer is fitted
// here). Throws ValidationError for fewer than 2 classes and NumericalError
// if all samples are identical or a binary fails to converge.
SvmModel train_svm(const Dataset& train, const SvmConfig& config, std::size_t threads = 1);

std::array<int, kNumClasses> vote_tally(const SvmModel& model, std::span<const double> raw);
int predict(const SvmModel& model, std::span<const double> raw);
std::vector<int> predict_batch(const SvmModel& model, const Dataset& data, std::size_t threads = 1);

nlohmann::json to_json(const SvmModel& model);
SvmModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace hardi
