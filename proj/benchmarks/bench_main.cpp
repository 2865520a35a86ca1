#include <benchmark/benchmark.h>

#include "hardi/evaluation.hpp"
#include "hardi/features.hpp"
#include "hardi/phantom.hpp"
#include "hardi/spatial_filter.hpp"
#include "hardi/svm.hpp"

namespace {

using namespace hardi;

// Default phantom at SNR 20, built once.
const Phantom& phantom() {
  static const Phantom p = [] {
    PhantomSpec spec;
    spec.geometry = default_fibercup_geometry();
    spec.snr = 20.0;
    return generate_phantom(spec);
  }();
  return p;
}

const FeatureVolume& sh8() {
  static const FeatureVolume f = fit_sh(phantom().dwi, 8);
  return f;
}

void BM_GeneratePhantom(benchmark::State& state) {
  PhantomSpec spec;
  spec.geometry = default_fibercup_geometry();
  spec.snr = 20.0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_phantom(spec));
}
BENCHMARK(BM_GeneratePhantom)->Unit(benchmark::kMillisecond);

void BM_FitSh(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_sh(phantom().dwi, order));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(phantom().dwi.dims().voxels()));
}
BENCHMARK(BM_FitSh)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TensorFit(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_tensor_eigenvalues(phantom().dwi));
}
BENCHMARK(BM_TensorFit)->Unit(benchmark::kMillisecond);

void BM_Convolve(benchmark::State& state) {
  const auto w = static_cast<std::size_t>(state.range(0));
  const auto bank = gaussian_bank(45, w);
  for (auto _ : state) benchmark::DoNotOptimize(convolve_features(sh8(), bank));
}
BENCHMARK(BM_Convolve)->Arg(5)->Arg(7)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_TrainSvm(benchmark::State& state) {
  const auto ds = flatten(convolve_features(sh8(), gaussian_bank(45, 5)), phantom().labels);
  for (auto _ : state) benchmark::DoNotOptimize(train_svm(ds, SvmConfig{}, 1));
}
BENCHMARK(BM_TrainSvm)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_PredictBatch(benchmark::State& state) {
  const auto ds = flatten(convolve_features(sh8(), gaussian_bank(45, 5)), phantom().labels);
  const auto model = train_svm(ds, SvmConfig{}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(predict_batch(model, ds, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_PredictBatch)->Unit(benchmark::kMillisecond);

void BM_Metrics(benchmark::State& state) {
  const auto& labels = phantom().labels;
  std::vector<int> truth(labels.data().begin(), labels.data().end());
  std::vector<int> pred(truth.rbegin(), truth.rend());
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(truth, pred));
}
BENCHMARK(BM_Metrics);

}  // namespace

BENCHMARK_MAIN();
