#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hardi/evaluation.hpp"
#include "hardi/random.hpp"
#include "hardi/spatial_filter.hpp"
#include "hardi/svm.hpp"

namespace hardi {

struct GaConfig {
  std::size_t population = 500;
  std::size_t generations = 100;
  // Stop after the generation during which this many seconds elapsed.
  std::optional<double> wall_clock_budget_seconds;
  double crossover_rate = 0.9;
  std::size_t crossover_points = 2;
  // Per-gene probability of an additive Gaussian perturbation.
  double mutation_rate = 0.1;
  double mutation_sigma = 0.2;
  std::size_t elites = 20;
  std::size_t tournament_size = 3;
  std::uint64_t seed = 42;
  std::size_t folds = 6;
  std::size_t threads = 1;

  void validate() const;
};

struct Genome {
  std::vector<double> genes;
  std::optional<double> fitness;
};

KernelBank genome_to_bank(const Genome& genome, std::size_t n, std::size_t w);
Genome bank_to_genome(const KernelBank& bank);

// Individual 0 is the Gaussian bank; the next population/2 are the mean of
// individual 0 and a uniform [-2, 2] genome; the rest are uniform random.
// Consumes `rng`.
std::vector<Genome> initial_population(std::size_t n, std::size_t w, const GaConfig& config, Rng& rng);
std::vector<Genome> initial_population(std::size_t n, std::size_t w, const GaConfig& config);

// Rebuilds the feature grid a dataset was flattened from (provenance must
// cover a full grid).
FeatureVolume reconstruct_features(const Dataset& dataset, FeatureKind kind);

// Fitness of a kernel bank: cross-validated error score of the convolved
// dataset on a fixed fold partition.
class FitnessEvaluator {
 public:
  FitnessEvaluator(const Dataset& dataset, FeatureKind kind, const SvmConfig& svm,
                   const FitnessWeights& weights, std::size_t folds, std::uint64_t seed);

  // Full report; throws on training failure.
  CrossValidationResult evaluate(const KernelBank& bank) const;
  // Scalar fitness; any library error maps to +infinity.
  double fitness(const KernelBank& bank) const;
  Dataset convolved_dataset(const KernelBank& bank) const;

  const Folds& folds() const { return folds_; }
  std::size_t n() const { return features_.n(); }

 private:
  const Dataset& dataset_;
  FeatureVolume features_;
  std::vector<std::size_t> voxel_of_sample_;
  SvmConfig svm_;
  FitnessWeights weights_;
  Folds folds_;
};

struct GenerationStats {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  // Mean over finite fitness values.
  double mean_fitness = 0.0;
  double elapsed_seconds = 0.0;
  std::size_t evaluations = 0;
};

// Everything needed to continue an interrupted run bit-identically.
struct EvolutionState {
  std::size_t generation = 0;
  std::vector<Genome> population;
  std::string rng_state;
  std::vector<GenerationStats> history;
  Genome best;
  double best_fitness = std::numeric_limits<double>::infinity();
  double elapsed_seconds = 0.0;
  std::size_t evaluations = 0;
};

nlohmann::json to_json(const EvolutionState& state);
EvolutionState state_from_json(const nlohmann::json& j);

struct EvolutionResult {
  Genome best;
  double best_fitness = std::numeric_limits<double>::infinity();
  std::vector<GenerationStats> history;
  std::size_t evaluations = 0;
};

struct EvolutionHooks {
  // Called with the state at the start of every generation after the first.
  std::function<void(const EvolutionState&)> checkpoint;
  std::function<void(const GenerationStats&)> on_generation;
};

// Minimizes the error score over kernel banks of width w. Each generation
// keeps the `elites` best genomes, then fills the population by tournament
// selection, two-point crossover (else cloning) and per-gene Gaussian
// mutation clamped to [-2, 2]. Fitness values are cached per genome.
EvolutionResult evolve(const Dataset& dataset, FeatureKind kind, std::size_t w,
                       const SvmConfig& svm, const FitnessWeights& weights, const GaConfig& config,
                       const EvolutionHooks& hooks = {}, const EvolutionState* resume = nullptr);

}  // namespace hardi
