// hardi: batch command line front end for the classification pipeline.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hardi/baseline.hpp"
#include "hardi/errors.hpp"
#include "hardi/evaluation.hpp"
#include "hardi/features.hpp"
#include "hardi/kernel_search.hpp"
#include "hardi/parallel.hpp"
#include "hardi/phantom.hpp"
#include "hardi/render.hpp"
#include "hardi/spatial_filter.hpp"
#include "hardi/svm.hpp"
#include "hardi/volume_io.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hardi::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Global {
  std::size_t threads = 1;
};

void add_volume_outputs(RunManifest& m, const fs::path& prefix) {
  m.output(sidecar_path(prefix));
  m.output(blob_path(prefix));
}

void add_volume_inputs(RunManifest& m, const fs::path& prefix) {
  m.input(sidecar_path(prefix));
  m.input(blob_path(prefix));
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

LabelVolume labels_from_predictions(const FeatureVolume& features, const std::vector<int>& codes) {
  std::vector<std::uint8_t> labels(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) labels[i] = static_cast<std::uint8_t>(codes[i]);
  return LabelVolume(features.dims(), std::move(labels), features.voxel_size_mm());
}

// Dataset of every voxel with a placeholder label, for prediction only.
Dataset unlabelled_dataset(const FeatureVolume& features) {
  std::vector<std::uint8_t> zeros(features.dims().voxels(), 0);
  return flatten(features, LabelVolume(features.dims(), std::move(zeros), features.voxel_size_mm()));
}

Padding parse_padding(const std::string& s) {
  if (s == "zero") return Padding::kZero;
  if (s == "replicate") return Padding::kReplicate;
  throw ValidationError("unknown padding '" + s + "' (expected zero or replicate)");
}

void add_svm_options(CLI::App* cmd, SvmConfig& cfg) {
  cmd->add_option("--C", cfg.C, "SVM soft-margin penalty")->capture_default_str();
  cmd->add_option("--gamma", cfg.gamma, "Gaussian kernel width (<= 0: 1/n)")->capture_default_str();
  cmd->add_option("--tolerance", cfg.tolerance, "SMO stopping tolerance")->capture_default_str();
  cmd->add_option("--max-kernel-evals", cfg.max_kernel_evaluations,
                  "kernel evaluation cap per binary problem")
      ->capture_default_str();
}

json svm_json(const SvmConfig& cfg) {
  return {{"C", cfg.C},
          {"gamma", cfg.gamma},
          {"tolerance", cfg.tolerance},
          {"max_kernel_evaluations", cfg.max_kernel_evaluations}};
}

// ---- phantom ----

struct PhantomArgs {
  std::string out;
  double snr = 20.0;
  std::uint64_t seed = 42;
  std::vector<std::size_t> dims{64, 64, 3};
  std::size_t directions = 64;
  double b_value = 1500.0;
};

int run_phantom(const PhantomArgs& a) {
  if (a.dims.size() != 3) throw ValidationError("--dims expects X,Y,Z");
  RunManifest manifest("phantom");
  PhantomSpec spec;
  spec.dims = {a.dims[0], a.dims[1], a.dims[2]};
  spec.snr = a.snr;
  spec.seed = a.seed;
  spec.n_directions = a.directions;
  spec.b_value = a.b_value;
  const double scale = static_cast<double>(std::min(spec.dims.x, spec.dims.y)) / 64.0;
  spec.geometry = scale_geometry(default_fibercup_geometry(), scale);
  const Phantom phantom = generate_phantom(spec);

  const fs::path dwi = a.out + "_dwi";
  const fs::path labels = a.out + "_labels";
  write_volume(dwi, phantom.dwi);
  write_volume(labels, phantom.labels);
  add_volume_outputs(manifest, dwi);
  add_volume_outputs(manifest, labels);
  manifest.parameters() = {{"dims", a.dims},      {"snr", a.snr},
                           {"directions", a.directions}, {"b_value", a.b_value}};
  manifest.set_seed(a.seed);
  manifest.write(a.out);
  const auto h = phantom.labels.histogram();
  std::printf("phantom %zux%zux%zu: CSF %zu GM %zu WMSF %zu WMCF %zu\n", spec.dims.x, spec.dims.y,
              spec.dims.z, h[0], h[1], h[2], h[3]);
  return kExitOk;
}

// ---- features ----

struct FeaturesArgs {
  std::string in;
  std::string kind;
  double lambda = kDefaultShLambda;
  std::string out;
};

int run_features(const FeaturesArgs& a) {
  RunManifest manifest("features");
  const FeatureKind kind = parse_feature_kind(a.kind);
  const DwiVolume dwi = read_dwi(a.in);
  const FeatureVolume features = compute_features(dwi, kind, a.lambda);
  write_volume(a.out, features);
  add_volume_inputs(manifest, a.in);
  add_volume_outputs(manifest, a.out);
  manifest.parameters() = {{"kind", to_string(kind)}, {"lambda", a.lambda}};
  manifest.write(a.out);
  return kExitOk;
}

// ---- convolve ----

struct ConvolveArgs {
  std::string in;
  std::string bank;
  std::string out;
  std::string padding = "zero";
};

int run_convolve(const ConvolveArgs& a) {
  RunManifest manifest("convolve");
  const FeatureVolume features = read_features(a.in);
  const KernelBank bank = load_bank(a.bank);
  const FeatureVolume out = convolve_features(features, bank, parse_padding(a.padding));
  write_volume(a.out, out);
  add_volume_inputs(manifest, a.in);
  manifest.input(a.bank);
  add_volume_outputs(manifest, a.out);
  manifest.parameters() = {{"padding", a.padding}, {"w", bank.w()}, {"n", bank.n()}};
  manifest.write(a.out);
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  std::string features;
  std::string labels;
  std::string bank;
  std::string padding = "zero";
  std::string out;
  SvmConfig svm;
};

FeatureVolume maybe_convolve(FeatureVolume features, const std::string& bank_path,
                             const std::string& padding, RunManifest& manifest) {
  if (bank_path.empty()) return features;
  manifest.input(bank_path);
  return convolve_features(features, load_bank(bank_path), parse_padding(padding));
}

int run_train(const TrainArgs& a, const Global& g) {
  RunManifest manifest("train");
  FeatureVolume features = read_features(a.features);
  const LabelVolume labels = read_labels(a.labels);
  add_volume_inputs(manifest, a.features);
  add_volume_inputs(manifest, a.labels);
  features = maybe_convolve(std::move(features), a.bank, a.padding, manifest);
  const SvmModel model = train_svm(flatten(features, labels), a.svm, g.threads);
  save_model(a.out, model);
  manifest.output(a.out);
  manifest.parameters() = {{"svm", svm_json(a.svm)}, {"bank", a.bank}, {"padding", a.padding}};
  manifest.write(a.out);
  std::printf("trained %zu support vectors, gamma %.6g\n", model.n_support_vectors(), model.gamma);
  return kExitOk;
}

// ---- classify ----

struct ClassifyArgs {
  std::string model;
  std::string features;
  std::string bank;
  std::string padding = "zero";
  std::string out;
};

int run_classify(const ClassifyArgs& a, const Global& g) {
  RunManifest manifest("classify");
  const SvmModel model = load_model(a.model);
  FeatureVolume features = read_features(a.features);
  manifest.input(a.model);
  add_volume_inputs(manifest, a.features);
  features = maybe_convolve(std::move(features), a.bank, a.padding, manifest);
  const auto t0 = std::chrono::steady_clock::now();
  const auto codes = predict_batch(model, unlabelled_dataset(features), g.threads);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_volume(a.out, labels_from_predictions(features, codes));
  add_volume_outputs(manifest, a.out);
  manifest.parameters() = {{"bank", a.bank}, {"padding", a.padding}, {"classify_seconds", seconds}};
  manifest.write(a.out);
  std::printf("classified %zu voxels in %.3f s\n", codes.size(), seconds);
  return kExitOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string predicted;
  std::string truth;
  std::string features;
  std::string bank;
  std::string padding = "zero";
  std::size_t folds = 6;
  std::uint64_t seed = 42;
  std::string report;
  FitnessWeights weights;
  SvmConfig svm;
};

int run_evaluate(const EvaluateArgs& a, const Global& g) {
  RunManifest manifest("evaluate");
  const LabelVolume truth = read_labels(a.truth);
  add_volume_inputs(manifest, a.truth);
  EvalReport report;
  if (!a.predicted.empty()) {
    const LabelVolume predicted = read_labels(a.predicted);
    add_volume_inputs(manifest, a.predicted);
    require(predicted.dims() == truth.dims(), "predicted and truth label grids differ in size");
    std::vector<int> t(truth.data().begin(), truth.data().end());
    std::vector<int> p(predicted.data().begin(), predicted.data().end());
    report = compute_metrics(t, p, a.weights);
  } else {
    require(!a.features.empty(), "evaluate needs --predicted or --features");
    FeatureVolume features = read_features(a.features);
    add_volume_inputs(manifest, a.features);
    features = maybe_convolve(std::move(features), a.bank, a.padding, manifest);
    report = cross_validate(flatten(features, truth), a.svm, a.weights, a.folds, a.seed, g.threads);
  }
  std::cout << format_report(report);
  manifest.parameters() = {{"weights", {a.weights.alpha, a.weights.beta, a.weights.gamma_w}},
                           {"folds", a.folds},
                           {"bank", a.bank},
                           {"svm", svm_json(a.svm)}};
  manifest.set_seed(a.seed);
  if (!a.report.empty()) {
    write_json_file(a.report, to_json(report));
    manifest.output(a.report);
    manifest.write(a.report);
  }
  return kExitOk;
}

// ---- optimize ----

struct OptimizeArgs {
  std::string features;
  std::string labels;
  std::size_t width = 5;
  GaConfig ga;
  double budget_hours = 0.0;
  std::string out;
  std::string history;
  bool resume = false;
  SvmConfig svm;
};

std::string format_fitness(double f) {
  if (std::isinf(f)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", f);
  return buf;
}

void write_history(const fs::path& path, const std::vector<GenerationStats>& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "generation,best_fitness,mean_fitness\n";
  for (const auto& h : history) {
    out << h.generation << ',' << format_fitness(h.best_fitness) << ','
        << format_fitness(h.mean_fitness) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

int run_optimize(OptimizeArgs a, const Global& g) {
  RunManifest manifest("optimize");
  require(a.width == 5 || a.width == 7 || a.width == 9, "--width must be 5, 7 or 9");
  const FeatureVolume features = read_features(a.features);
  const LabelVolume labels = read_labels(a.labels);
  add_volume_inputs(manifest, a.features);
  add_volume_inputs(manifest, a.labels);
  if (a.budget_hours > 0.0) a.ga.wall_clock_budget_seconds = a.budget_hours * 3600.0;
  a.ga.threads = g.threads;
  a.ga.elites = std::min(a.ga.elites, a.ga.population - 1);

  const fs::path out = a.out;
  const fs::path history = a.history.empty() ? out.parent_path() / "history.csv" : fs::path(a.history);
  fs::path checkpoint = out;
  checkpoint += ".checkpoint.json";

  std::optional<EvolutionState> resume;
  if (a.resume && fs::exists(checkpoint)) {
    std::ifstream in(checkpoint);
    if (!in) throw IoError("cannot read " + checkpoint.string());
    resume = state_from_json(json::parse(in));
    std::printf("resuming at generation %zu\n", resume->generation);
  }

  EvolutionHooks hooks;
  hooks.checkpoint = [&](const EvolutionState& state) {
    fs::path tmp = checkpoint;
    tmp += ".tmp";
    write_json_file(tmp, to_json(state));
    fs::rename(tmp, checkpoint);
    write_history(history, state.history);
  };
  hooks.on_generation = [](const GenerationStats& s) {
    std::printf("generation %zu best %.6f mean %.6f elapsed %.1fs\n", s.generation, s.best_fitness,
                s.mean_fitness, s.elapsed_seconds);
    std::fflush(stdout);
  };
  const Dataset dataset = flatten(features, labels);
  const EvolutionResult result = evolve(dataset, features.kind(), a.width, a.svm, FitnessWeights{},
                                        a.ga, hooks, resume ? &*resume : nullptr);
  save_bank(out, genome_to_bank(result.best, features.n(), a.width));
  write_history(history, result.history);
  manifest.output(out);
  manifest.output(history);

  json elapsed = json::array();
  for (const auto& h : result.history) elapsed.push_back(h.elapsed_seconds);
  manifest.parameters() = {{"width", a.width},
                           {"population", a.ga.population},
                           {"generations", a.ga.generations},
                           {"elites", a.ga.elites},
                           {"crossover_rate", a.ga.crossover_rate},
                           {"mutation_rate", a.ga.mutation_rate},
                           {"mutation_sigma", a.ga.mutation_sigma},
                           {"tournament_size", a.ga.tournament_size},
                           {"budget_hours", a.budget_hours},
                           {"svm", svm_json(a.svm)},
                           {"best_fitness", result.best_fitness},
                           {"evaluations", result.evaluations},
                           {"generation_elapsed_seconds", elapsed}};
  manifest.set_seed(a.ga.seed);
  manifest.write(out);
  std::printf("best fitness %.6f after %zu evaluations\n", result.best_fitness, result.evaluations);
  return kExitOk;
}

// ---- baseline ----

struct BaselineArgs {
  std::string dwi;
  std::string labels;
  std::string mode = "svm";
  std::string report;
  std::size_t folds = 6;
  std::size_t grid_folds = 10;
  std::size_t max_samples = 0;
  std::uint64_t seed = 42;
  double lambda = kDefaultShLambda;
};

int run_baseline(const BaselineArgs& a) {
  RunManifest manifest("baseline");
  const DwiVolume dwi = read_dwi(a.dwi);
  const LabelVolume labels = read_labels(a.labels);
  add_volume_inputs(manifest, a.dwi);
  add_volume_inputs(manifest, a.labels);
  FusionOptions opts;
  if (a.mode == "svm") {
    opts.mode = FusionMode::kSvm;
  } else if (a.mode == "vote") {
    opts.mode = FusionMode::kVote;
  } else {
    throw ValidationError("unknown --mode '" + a.mode + "' (expected svm or vote)");
  }
  opts.seed = a.seed;
  opts.grid.seed = a.seed;
  opts.grid.folds = a.grid_folds;
  opts.grid.max_samples = a.max_samples;
  KindDatasets inputs;
  for (FeatureKind kind : kFusionKinds) {
    inputs.emplace_back(kind, flatten(compute_features(dwi, kind, a.lambda), labels));
  }
  const auto cv = cross_validate_fusion(inputs, opts, FitnessWeights{}, a.folds, a.seed);
  std::cout << format_report(cv.report);
  write_json_file(a.report, to_json(cv.report));
  manifest.output(a.report);
  manifest.parameters() = {{"mode", a.mode},
                           {"folds", a.folds},
                           {"grid_folds", a.grid_folds},
                           {"max_samples", a.max_samples},
                           {"lambda", a.lambda}};
  manifest.set_seed(a.seed);
  manifest.write(a.report);
  return kExitOk;
}

// ---- render ----

struct RenderArgs {
  std::string predicted;
  std::string truth;
  std::string out;
  std::size_t scale = 4;
};

int run_render(const RenderArgs& a) {
  RunManifest manifest("render");
  const LabelVolume predicted = read_labels(a.predicted);
  const LabelVolume truth = read_labels(a.truth);
  add_volume_inputs(manifest, a.predicted);
  add_volume_inputs(manifest, a.truth);
  for (std::size_t z = 0; z < truth.dims().z; ++z) {
    const fs::path path = a.out + "_slice" + std::to_string(z) + ".ppm";
    write_ppm(path, label_panels(predicted, truth, z, a.scale));
    manifest.output(path);
  }
  manifest.parameters() = {{"scale", a.scale}};
  manifest.write(a.out);
  return kExitOk;
}

// ---- timing ----

struct TimingArgs {
  double voxels = 0.0;
  double per_run_seconds = 1.5;
};

int run_timing(const TimingArgs& a) {
  require(a.voxels >= 0.0, "--voxels must be >= 0");
  std::printf("%.1f\n", estimate_classification_time(a.voxels, a.per_run_seconds));
  return kExitOk;
}

}  // namespace
}  // namespace hardi::cli

int main(int argc, char** argv) {
  using namespace hardi;
  using namespace hardi::cli;

  CLI::App app{"HARDI voxel classification pipeline"};
  app.require_subcommand(1);
  Global global;
  app.add_option("--threads", global.threads, "worker threads")->capture_default_str();

  PhantomArgs phantom;
  auto* c_phantom = app.add_subcommand("phantom", "generate a synthetic phantom");
  c_phantom->add_option("--out", phantom.out, "output prefix")->required();
  c_phantom->add_option("--snr", phantom.snr, "Rician SNR (0 = noiseless)")->capture_default_str();
  c_phantom->add_option("--seed", phantom.seed, "noise seed")->capture_default_str();
  c_phantom->add_option("--dims", phantom.dims, "X,Y,Z")->delimiter(',')->expected(3);
  c_phantom->add_option("--directions", phantom.directions)->capture_default_str();
  c_phantom->add_option("--b-value", phantom.b_value)->capture_default_str();

  FeaturesArgs features;
  auto* c_features = app.add_subcommand("features", "compute voxel features from DWI");
  c_features->add_option("--in", features.in, "DWI prefix")->required();
  c_features->add_option("--kind", features.kind, "sh4|sh8|eig|sh4ri|sh8ri|odf4|odf8")->required();
  c_features->add_option("--lambda", features.lambda, "SH regularisation")->capture_default_str();
  c_features->add_option("--out", features.out, "output prefix")->required();

  ConvolveArgs convolve;
  auto* c_convolve = app.add_subcommand("convolve", "apply a kernel bank to a feature volume");
  c_convolve->add_option("--in", convolve.in, "feature prefix")->required();
  c_convolve->add_option("--bank", convolve.bank, "kernel bank JSON")->required();
  c_convolve->add_option("--out", convolve.out, "output prefix")->required();
  c_convolve->add_option("--padding", convolve.padding, "zero|replicate")->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "train a one-vs-one SVM");
  c_train->add_option("--features", train.features)->required();
  c_train->add_option("--labels", train.labels)->required();
  c_train->add_option("--bank", train.bank, "convolve with this bank first");
  c_train->add_option("--padding", train.padding)->capture_default_str();
  c_train->add_option("--out", train.out, "model JSON")->required();
  add_svm_options(c_train, train.svm);

  ClassifyArgs classify;
  auto* c_classify = app.add_subcommand("classify", "label every voxel with a trained model");
  c_classify->add_option("--model", classify.model)->required();
  c_classify->add_option("--features", classify.features)->required();
  c_classify->add_option("--bank", classify.bank, "convolve with this bank first");
  c_classify->add_option("--padding", classify.padding)->capture_default_str();
  c_classify->add_option("--out", classify.out, "label volume prefix")->required();

  EvaluateArgs evaluate;
  auto* c_evaluate = app.add_subcommand(
      "evaluate", "score predicted labels, or cross-validate a feature volume");
  c_evaluate->add_option("--truth,--labels", evaluate.truth, "ground-truth labels")->required();
  c_evaluate->add_option("--predicted", evaluate.predicted, "predicted labels");
  c_evaluate->add_option("--features", evaluate.features, "features to cross-validate");
  c_evaluate->add_option("--bank", evaluate.bank, "convolve features with this bank first");
  c_evaluate->add_option("--padding", evaluate.padding)->capture_default_str();
  c_evaluate->add_option("--folds", evaluate.folds)->capture_default_str();
  c_evaluate->add_option("--seed", evaluate.seed)->capture_default_str();
  c_evaluate->add_option("--alpha", evaluate.weights.alpha)->capture_default_str();
  c_evaluate->add_option("--beta", evaluate.weights.beta)->capture_default_str();
  c_evaluate->add_option("--gamma-w", evaluate.weights.gamma_w)->capture_default_str();
  c_evaluate->add_option("--report", evaluate.report, "write the report as JSON");
  add_svm_options(c_evaluate, evaluate.svm);

  OptimizeArgs optimize;
  auto* c_optimize = app.add_subcommand("optimize", "evolve a convolution kernel bank");
  c_optimize->add_option("--features", optimize.features)->required();
  c_optimize->add_option("--labels", optimize.labels)->required();
  c_optimize->add_option("--width", optimize.width, "5, 7 or 9")->capture_default_str();
  c_optimize->add_option("--population", optimize.ga.population)->capture_default_str();
  c_optimize->add_option("--generations", optimize.ga.generations)->capture_default_str();
  c_optimize->add_option("--elites", optimize.ga.elites)->capture_default_str();
  c_optimize->add_option("--crossover-rate", optimize.ga.crossover_rate)->capture_default_str();
  c_optimize->add_option("--mutation-rate", optimize.ga.mutation_rate)->capture_default_str();
  c_optimize->add_option("--mutation-sigma", optimize.ga.mutation_sigma)->capture_default_str();
  c_optimize->add_option("--tournament", optimize.ga.tournament_size)->capture_default_str();
  c_optimize->add_option("--folds", optimize.ga.folds)->capture_default_str();
  c_optimize->add_option("--seed", optimize.ga.seed)->capture_default_str();
  c_optimize->add_option("--budget-hours", optimize.budget_hours, "wall-clock cap (0 = none)");
  c_optimize->add_option("--out", optimize.out, "best bank JSON")->required();
  c_optimize->add_option("--history", optimize.history, "history CSV (default: beside --out)");
  c_optimize->add_flag("--resume", optimize.resume, "continue from the checkpoint beside --out");
  add_svm_options(c_optimize, optimize.svm);

  BaselineArgs baseline;
  auto* c_baseline = app.add_subcommand("baseline", "cross-validate the SVM-fusion baseline");
  c_baseline->add_option("--dwi", baseline.dwi)->required();
  c_baseline->add_option("--labels", baseline.labels)->required();
  c_baseline->add_option("--mode", baseline.mode, "svm|vote")->capture_default_str();
  c_baseline->add_option("--report", baseline.report)->required();
  c_baseline->add_option("--folds", baseline.folds)->capture_default_str();
  c_baseline->add_option("--grid-folds", baseline.grid_folds)->capture_default_str();
  c_baseline->add_option("--max-samples", baseline.max_samples, "grid-search subsample (0 = all)")
      ->capture_default_str();
  c_baseline->add_option("--seed", baseline.seed)->capture_default_str();
  c_baseline->add_option("--lambda", baseline.lambda)->capture_default_str();

  RenderArgs render;
  auto* c_render = app.add_subcommand("render", "write predicted | truth | error PPM panels");
  c_render->add_option("--predicted", render.predicted)->required();
  c_render->add_option("--truth", render.truth)->required();
  c_render->add_option("--out", render.out, "output prefix")->required();
  c_render->add_option("--scale", render.scale)->capture_default_str();

  TimingArgs timing;
  auto* c_timing = app.add_subcommand("timing", "extrapolated classification time in seconds");
  c_timing->add_option("--voxels", timing.voxels)->required();
  c_timing->add_option("--per-run", timing.per_run_seconds, "seconds for 3x64x64 voxels")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (global.threads == 0) throw ValidationError("--threads must be >= 1");
    set_default_threads(global.threads);
    if (*c_phantom) return run_phantom(phantom);
    if (*c_features) return run_features(features);
    if (*c_convolve) return run_convolve(convolve);
    if (*c_train) return run_train(train, global);
    if (*c_classify) return run_classify(classify, global);
    if (*c_evaluate) return run_evaluate(evaluate, global);
    if (*c_optimize) return run_optimize(optimize, global);
    if (*c_baseline) return run_baseline(baseline);
    if (*c_render) return run_render(render);
    if (*c_timing) return run_timing(timing);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
