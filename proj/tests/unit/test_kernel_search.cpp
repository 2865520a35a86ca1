#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "../fixtures.hpp"
#include "hardi/errors.hpp"
#include "hardi/kernel_search.hpp"

using namespace hardi;

namespace {

GaConfig small_config() {
  GaConfig cfg;
  cfg.population = 12;
  cfg.generations = 5;
  cfg.elites = 2;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("genome layout") {
  Genome g{{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}, std::nullopt};
  const auto bank = genome_to_bank(g, 1, 3);
  CHECK(bank.weight(0, 0, 0) == 0.0);
  CHECK(bank.weight(0, 0, 2) == 0.2);
  CHECK(bank.weight(0, 1, 0) == 0.3);
  CHECK(bank.weight(0, 2, 2) == 0.8);
  CHECK(bank_to_genome(gaussian_bank(45, 5)).genes.size() == 1125);
  CHECK_THROWS_AS(genome_to_bank(g, 2, 3), ValidationError);
}

TEST_CASE("bank to genome round trip") {
  Rng rng(4);
  GaConfig cfg;
  cfg.population = 6;
  cfg.elites = 1;
  for (const auto& g : initial_population(15, 7, cfg, rng)) {
    CHECK(bank_to_genome(genome_to_bank(g, 15, 7)).genes == g.genes);
  }
}

TEST_CASE("initial population composition") {
  GaConfig cfg;
  const auto pop = initial_population(3, 5, cfg);
  REQUIRE(pop.size() == 500);
  CHECK(pop[0].genes == gaussian_bank(3, 5).flatten());
  for (double g : pop[0].genes) {
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
  }
  for (std::size_t i = 1; i <= 250; ++i) {
    for (double g : pop[i].genes) {
      CHECK(g >= -1.0);
      CHECK(g <= 1.5);
    }
  }
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 251; i < 500; ++i) {
    for (double g : pop[i].genes) {
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
  }
  CHECK(lo < -1.5);
  CHECK(hi > 1.5);
  CHECK(lo >= -2.0);
  CHECK(hi <= 2.0);
  const auto again = initial_population(3, 5, cfg);
  for (std::size_t i = 0; i < pop.size(); ++i) CHECK(again[i].genes == pop[i].genes);
  cfg.seed = 43;
  CHECK(initial_population(3, 5, cfg)[1].genes != pop[1].genes);
}

TEST_CASE("GA config validation") {
  GaConfig cfg;
  cfg.elites = cfg.population;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = GaConfig{};
  cfg.mutation_rate = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = GaConfig{};
  cfg.population = 1;
  cfg.elites = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("features are rebuilt from provenance") {
  const Dataset ds = fixture::delta_toy();
  const auto f = reconstruct_features(ds, FeatureKind::kEig);
  CHECK(f.dims() == Dims{16, 16, 1});
  const auto back = flatten(f, LabelVolume(f.dims(), std::vector<std::uint8_t>(256, 0)));
  CHECK(back.values == ds.values);
  CHECK_THROWS_AS(reconstruct_features(ds, FeatureKind::kSh4), ValidationError);
}

TEST_CASE("fitness evaluator") {
  const Dataset ds = fixture::delta_toy();
  const FitnessEvaluator ev(ds, FeatureKind::kEig, SvmConfig{}, FitnessWeights{}, 6, 42);
  CHECK(ev.fitness(delta_bank(3, 5)) == 0.0);
  CHECK(ev.fitness(gaussian_bank(3, 5)) > 0.0);
  // An all-zero bank makes every sample identical: training fails, fitness is +inf.
  const KernelBank zero(5, std::vector<std::vector<double>>(3, std::vector<double>(25, 0.0)));
  CHECK(ev.fitness(zero) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(ev.evaluate(zero), NumericalError);
  CHECK(ev.folds() == stratified_folds(ds, 6, 42));
}

TEST_CASE("evolution is monotone, deterministic and thread independent") {
  const Dataset ds = fixture::delta_toy();
  const auto cfg = small_config();
  std::vector<EvolutionState> checkpoints;
  EvolutionHooks hooks;
  hooks.checkpoint = [&](const EvolutionState& s) { checkpoints.push_back(s); };
  const auto a = evolve(ds, FeatureKind::kEig, 5, SvmConfig{}, FitnessWeights{}, cfg, hooks);
  REQUIRE(a.history.size() == cfg.generations);
  for (std::size_t g = 1; g < a.history.size(); ++g) {
    CHECK(a.history[g].best_fitness <= a.history[g - 1].best_fitness);
  }
  const FitnessEvaluator ev(ds, FeatureKind::kEig, SvmConfig{}, FitnessWeights{}, 6, cfg.seed);
  CHECK(a.history[0].best_fitness <= ev.fitness(gaussian_bank(3, 5)));
  CHECK(ev.fitness(genome_to_bank(a.best, 3, 5)) == a.best_fitness);

  // Elites head each new population, sorted, and match the running best.
  REQUIRE(checkpoints.size() == cfg.generations - 1);
  for (std::size_t t = 0; t < checkpoints.size(); ++t) {
    const auto& pop = checkpoints[t].population;
    REQUIRE(pop[0].fitness);
    REQUIRE(pop[1].fitness);
    CHECK(*pop[0].fitness <= *pop[1].fitness);
    CHECK(*pop[0].fitness == checkpoints[t].history.back().best_fitness);
    for (const auto& g : pop) {
      for (double x : g.genes) {
        CHECK(x >= -2.0);
        CHECK(x <= 2.0);
      }
    }
  }

  auto threaded = cfg;
  threaded.threads = 3;
  const auto b = evolve(ds, FeatureKind::kEig, 5, SvmConfig{}, FitnessWeights{}, threaded);
  CHECK(b.best.genes == a.best.genes);
  REQUIRE(b.history.size() == a.history.size());
  for (std::size_t g = 0; g < a.history.size(); ++g) {
    CHECK(b.history[g].best_fitness == a.history[g].best_fitness);
    CHECK(b.history[g].mean_fitness == a.history[g].mean_fitness);
  }
}

TEST_CASE("resuming from a checkpoint reproduces the uninterrupted run") {
  const Dataset ds = fixture::delta_toy(1);
  const auto cfg = small_config();
  std::vector<EvolutionState> checkpoints;
  EvolutionHooks hooks;
  hooks.checkpoint = [&](const EvolutionState& s) { checkpoints.push_back(s); };
  const auto full = evolve(ds, FeatureKind::kEig, 5, SvmConfig{}, FitnessWeights{}, cfg, hooks);
  REQUIRE(checkpoints.size() >= 2);
  // Through JSON, as the CLI does.
  const auto restored = state_from_json(to_json(checkpoints[1]));
  const auto resumed =
      evolve(ds, FeatureKind::kEig, 5, SvmConfig{}, FitnessWeights{}, cfg, {}, &restored);
  CHECK(resumed.best.genes == full.best.genes);
  REQUIRE(resumed.history.size() == full.history.size());
  for (std::size_t g = 0; g < full.history.size(); ++g) {
    CHECK(resumed.history[g].best_fitness == full.history[g].best_fitness);
    CHECK(resumed.history[g].mean_fitness == full.history[g].mean_fitness);
  }
}

TEST_CASE("checkpoint JSON keeps infinite fitness") {
  EvolutionState s;
  s.generation = 3;
  s.population = {{{0.5, -0.5}, std::numeric_limits<double>::infinity()}, {{1.0, 2.0}, std::nullopt},
                  {{0.0, 0.0}, 0.25}};
  s.best = s.population[2];
  s.best_fitness = 0.25;
  s.rng_state = "1 2 3";
  s.history.push_back({0, 0.25, 0.5, 1.0, 3});
  const auto back = state_from_json(to_json(s));
  CHECK(back.generation == 3);
  CHECK(std::isinf(*back.population[0].fitness));
  CHECK_FALSE(back.population[1].fitness.has_value());
  CHECK(*back.population[2].fitness == 0.25);
  CHECK(back.best_fitness == 0.25);
  CHECK(back.history[0].evaluations == 3);
  CHECK_THROWS_AS(state_from_json(nlohmann::json::object()), FormatError);
}

TEST_CASE("wall clock budget stops after the current generation") {
  const Dataset ds = fixture::delta_toy();
  auto cfg = small_config();
  cfg.wall_clock_budget_seconds = 0.0;
  const auto r = evolve(ds, FeatureKind::kEig, 5, SvmConfig{}, FitnessWeights{}, cfg);
  CHECK(r.history.size() == 1);
}

TEST_CASE("delta toy is solved") {
  const Dataset ds = fixture::delta_toy();
  const auto h = ds.histogram();
  for (int c = 1; c < 4; ++c) REQUIRE(h[static_cast<std::size_t>(c)] >= 6);
  GaConfig cfg;
  cfg.population = 50;
  cfg.generations = 30;
  const auto r = evolve(ds, FeatureKind::kEig, 5, SvmConfig{}, FitnessWeights{}, cfg);
  CHECK(r.best_fitness == 0.0);
}
