#include "hardi/kernel_search.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hardi/errors.hpp"
#include "hardi/parallel.hpp"

namespace hardi {

namespace {

struct GenesHash {
  std::size_t operator()(const std::vector<double>& genes) const {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (double g : genes) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(g));
    return static_cast<std::size_t>(h);
  }
};

using FitnessCache = std::unordered_map<std::vector<double>, double, GenesHash>;

std::vector<double> random_genes(std::size_t length, Rng& rng) {
  std::uniform_real_distribution<double> uniform(-kKernelWeightLimit, kKernelWeightLimit);
  std::vector<double> genes(length);
  for (auto& g : genes) g = uniform(rng);
  return genes;
}

std::size_t tournament(const std::vector<Genome>& population, std::size_t size, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
  std::size_t best = pick(rng);
  for (std::size_t t = 1; t < size; ++t) {
    const std::size_t c = pick(rng);
    if (*population[c].fitness < *population[best].fitness ||
        (*population[c].fitness == *population[best].fitness && c < best)) {
      best = c;
    }
  }
  return best;
}

std::string save_rng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void load_rng(Rng& rng, const std::string& state) {
  std::istringstream in(state);
  in >> rng;
  if (!in) throw FormatError("corrupt RNG state in checkpoint");
}

}  // namespace

void GaConfig::validate() const {
  require(population >= 2, "GA population must be >= 2");
  require(elites < population, "GA elites must be fewer than the population");
  require(generations >= 1, "GA needs at least one generation");
  require(crossover_rate >= 0.0 && crossover_rate <= 1.0, "crossover rate must be in [0, 1]");
  require(mutation_rate >= 0.0 && mutation_rate <= 1.0, "mutation rate must be in [0, 1]");
  require(mutation_sigma >= 0.0, "mutation sigma must be >= 0");
  require(crossover_points == 2, "only two-point crossover is supported");
  require(tournament_size >= 1, "tournament size must be >= 1");
  require(folds >= 2, "GA fitness needs at least 2 folds");
}

KernelBank genome_to_bank(const Genome& genome, std::size_t n, std::size_t w) {
  return KernelBank::from_flat(genome.genes, n, w);
}

Genome bank_to_genome(const KernelBank& bank) { return {bank.flatten(), std::nullopt}; }

std::vector<Genome> initial_population(std::size_t n, std::size_t w, const GaConfig& config,
                                       Rng& rng) {
  config.validate();
  const std::size_t length = n * w * w;
  std::vector<Genome> population;
  population.reserve(config.population);
  population.push_back(bank_to_genome(gaussian_bank(n, w)));
  const auto& seed_genes = population.front().genes;
  const std::size_t blended = config.population / 2;
  for (std::size_t i = 0; i < blended && population.size() < config.population; ++i) {
    auto genes = random_genes(length, rng);
    for (std::size_t k = 0; k < length; ++k) genes[k] = 0.5 * (genes[k] + seed_genes[k]);
    population.push_back({std::move(genes), std::nullopt});
  }
  while (population.size() < config.population) {
    population.push_back({random_genes(length, rng), std::nullopt});
  }
  return population;
}

std::vector<Genome> initial_population(std::size_t n, std::size_t w, const GaConfig& config) {
  Rng rng(config.seed);
  return initial_population(n, w, config, rng);
}

FeatureVolume reconstruct_features(const Dataset& dataset, FeatureKind kind) {
  dataset.validate();
  require(dataset.provenance.size() == dataset.size() && dataset.size() > 0,
          "dataset needs provenance to rebuild its feature grid");
  require(dataset.n == feature_dimension(kind), "dataset dimension does not match feature kind");
  Dims dims{0, 0, 0};
  for (const auto& p : dataset.provenance) {
    dims.x = std::max(dims.x, p.x + 1);
    dims.y = std::max(dims.y, p.y + 1);
    dims.z = std::max(dims.z, p.slice + 1);
  }
  require(dims.voxels() == dataset.size(), "dataset provenance does not cover a full grid");
  std::vector<double> values(dataset.values.size());
  std::vector<bool> seen(dims.voxels(), false);
  const std::size_t n = dataset.n;
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    const auto& p = dataset.provenance[s];
    const std::size_t v = dims.index(p.x, p.y, p.slice);
    require(!seen[v], "dataset provenance lists a voxel twice");
    seen[v] = true;
    const auto x = dataset.sample(s);
    std::copy(x.begin(), x.end(), values.begin() + static_cast<std::ptrdiff_t>(v * n));
  }
  return FeatureVolume(dims, kind, std::move(values));
}

FitnessEvaluator::FitnessEvaluator(const Dataset& dataset, FeatureKind kind, const SvmConfig& svm,
                                   const FitnessWeights& weights, std::size_t folds,
                                   std::uint64_t seed)
    : dataset_(dataset),
      features_(reconstruct_features(dataset, kind)),
      svm_(svm),
      weights_(weights),
      folds_(stratified_folds(dataset, folds, seed)) {
  voxel_of_sample_.reserve(dataset.size());
  for (const auto& p : dataset.provenance) {
    voxel_of_sample_.push_back(features_.dims().index(p.x, p.y, p.slice));
  }
}

Dataset FitnessEvaluator::convolved_dataset(const KernelBank& bank) const {
  const auto convolved = convolve_features(features_, bank);
  Dataset out;
  out.n = dataset_.n;
  out.labels = dataset_.labels;
  out.provenance = dataset_.provenance;
  out.values.resize(dataset_.values.size());
  for (std::size_t s = 0; s < dataset_.size(); ++s) {
    const auto x = convolved.at(voxel_of_sample_[s]);
    std::copy(x.begin(), x.end(), out.values.begin() + static_cast<std::ptrdiff_t>(s * out.n));
  }
  return out;
}

CrossValidationResult FitnessEvaluator::evaluate(const KernelBank& bank) const {
  return cross_validate_folds(convolved_dataset(bank), folds_, svm_, weights_);
}

double FitnessEvaluator::fitness(const KernelBank& bank) const {
  try {
    return evaluate(bank).report.fitness;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

nlohmann::json to_json(const EvolutionState& state) {
  using nlohmann::json;
  auto genome_json = [](const Genome& g) {
    json j = {{"genes", g.genes}};
    j["fitness"] = (g.fitness && std::isfinite(*g.fitness)) ? json(*g.fitness)
                   : g.fitness ? json("inf") : json(nullptr);
    return j;
  };
  json population = json::array();
  for (const auto& g : state.population) population.push_back(genome_json(g));
  json history = json::array();
  for (const auto& h : state.history) {
    history.push_back({{"generation", h.generation},
                       {"best_fitness", h.best_fitness},
                       {"mean_fitness", h.mean_fitness},
                       {"elapsed_seconds", h.elapsed_seconds},
                       {"evaluations", h.evaluations}});
  }
  return {{"generation", state.generation},
          {"population", population},
          {"rng_state", state.rng_state},
          {"history", history},
          {"best", genome_json(state.best)},
          {"elapsed_seconds", state.elapsed_seconds},
          {"evaluations", state.evaluations}};
}

EvolutionState state_from_json(const nlohmann::json& j) {
  auto genome_from = [](const nlohmann::json& jg) {
    Genome g;
    g.genes = jg.at("genes").get<std::vector<double>>();
    const auto& f = jg.at("fitness");
    if (f.is_number()) g.fitness = f.get<double>();
    else if (f.is_string()) g.fitness = std::numeric_limits<double>::infinity();
    return g;
  };
  try {
    EvolutionState state;
    state.generation = j.at("generation").get<std::size_t>();
    for (const auto& g : j.at("population")) state.population.push_back(genome_from(g));
    state.rng_state = j.at("rng_state").get<std::string>();
    for (const auto& h : j.at("history")) {
      state.history.push_back({h.at("generation").get<std::size_t>(),
                               h.at("best_fitness").get<double>(),
                               h.at("mean_fitness").get<double>(),
                               h.at("elapsed_seconds").get<double>(),
                               h.at("evaluations").get<std::size_t>()});
    }
    state.best = genome_from(j.at("best"));
    state.best_fitness = state.best.fitness.value_or(std::numeric_limits<double>::infinity());
    state.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    state.evaluations = j.at("evaluations").get<std::size_t>();
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed GA checkpoint: ") + e.what());
  }
}

EvolutionResult evolve(const Dataset& dataset, FeatureKind kind, std::size_t w,
                       const SvmConfig& svm, const FitnessWeights& weights, const GaConfig& config,
                       const EvolutionHooks& hooks, const EvolutionState* resume) {
  config.validate();
  svm.validate();
  weights.validate();
  require(w % 2 == 1, "kernel width must be odd");
  const std::size_t n = dataset.n;
  const std::size_t length = n * w * w;
  const FitnessEvaluator evaluator(dataset, kind, svm, weights, config.folds, config.seed);

  Rng rng(config.seed);
  EvolutionState state;
  if (resume != nullptr) {
    state = *resume;
    load_rng(rng, state.rng_state);
    for (const auto& g : state.population) {
      require(g.genes.size() == length, "checkpoint genome length does not match w*w*n");
    }
    require(state.population.size() == config.population,
            "checkpoint population size differs from the configuration");
  } else {
    state.population = initial_population(n, w, config, rng);
  }

  FitnessCache cache;
  for (const auto& g : state.population) {
    if (g.fitness) cache.emplace(g.genes, *g.fitness);
  }

  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  const double elapsed_before = state.elapsed_seconds;
  auto elapsed = [&] {
    return elapsed_before + std::chrono::duration<double>(Clock::now() - started).count();
  };

  for (; state.generation < config.generations; ++state.generation) {
    if (state.generation > 0 || resume != nullptr) {
      state.rng_state = save_rng(rng);
      state.elapsed_seconds = elapsed();
      if (hooks.checkpoint) hooks.checkpoint(state);
    }
    auto& population = state.population;

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < population.size(); ++i) {
      if (population[i].fitness) continue;
      if (auto it = cache.find(population[i].genes); it != cache.end()) {
        population[i].fitness = it->second;
      } else {
        pending.push_back(i);
      }
    }
    // Identical pending genomes are evaluated once.
    std::vector<std::size_t> unique;
    {
      std::unordered_map<std::vector<double>, std::size_t, GenesHash> first;
      for (auto i : pending) {
        if (first.emplace(population[i].genes, i).second) unique.push_back(i);
      }
    }
    std::vector<double> scores(unique.size());
    parallel_for(unique.size(), config.threads, [&](std::size_t u) {
      scores[u] = evaluator.fitness(genome_to_bank(population[unique[u]], n, w));
    });
    for (std::size_t u = 0; u < unique.size(); ++u) cache.emplace(population[unique[u]].genes, scores[u]);
    for (auto i : pending) population[i].fitness = cache.at(population[i].genes);
    state.evaluations += unique.size();

    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return *population[a].fitness < *population[b].fitness;
    });

    GenerationStats stats;
    stats.generation = state.generation;
    stats.best_fitness = *population[order.front()].fitness;
    double finite_sum = 0.0;
    std::size_t finite_count = 0;
    for (const auto& g : population) {
      if (std::isfinite(*g.fitness)) {
        finite_sum += *g.fitness;
        ++finite_count;
      }
    }
    stats.mean_fitness = finite_count > 0 ? finite_sum / static_cast<double>(finite_count)
                                          : std::numeric_limits<double>::infinity();
    if (stats.best_fitness < state.best_fitness || state.best.genes.empty()) {
      state.best_fitness = stats.best_fitness;
      state.best = population[order.front()];
    }
    stats.best_fitness = state.best_fitness;
    stats.elapsed_seconds = elapsed();
    stats.evaluations = state.evaluations;
    state.history.push_back(stats);
    if (hooks.on_generation) hooks.on_generation(stats);

    const bool last = state.generation + 1 >= config.generations;
    const bool out_of_time = config.wall_clock_budget_seconds &&
                             stats.elapsed_seconds >= *config.wall_clock_budget_seconds;
    if (last || out_of_time) {
      ++state.generation;
      break;
    }

    std::vector<Genome> sorted;
    sorted.reserve(population.size());
    for (auto i : order) sorted.push_back(population[i]);

    std::vector<Genome> next(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(config.elites));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> cut(0, length);
    std::normal_distribution<double> perturb(0.0, config.mutation_sigma);
    while (next.size() < config.population) {
      Genome a{sorted[tournament(sorted, config.tournament_size, rng)].genes, std::nullopt};
      Genome b{sorted[tournament(sorted, config.tournament_size, rng)].genes, std::nullopt};
      if (unit(rng) < config.crossover_rate) {
        std::size_t lo = cut(rng);
        std::size_t hi = cut(rng);
        if (lo > hi) std::swap(lo, hi);
        std::swap_ranges(a.genes.begin() + static_cast<std::ptrdiff_t>(lo),
                         a.genes.begin() + static_cast<std::ptrdiff_t>(hi),
                         b.genes.begin() + static_cast<std::ptrdiff_t>(lo));
      }
      for (Genome* child : {&a, &b}) {
        for (auto& g : child->genes) {
          if (unit(rng) < config.mutation_rate) {
            g = std::clamp(g + perturb(rng), -kKernelWeightLimit, kKernelWeightLimit);
          }
        }
      }
      next.push_back(std::move(a));
      if (next.size() < config.population) next.push_back(std::move(b));
    }
    population = std::move(next);
  }

  return {state.best, state.best_fitness, state.history, state.evaluations};
}

}  // namespace hardi
