#include "hardi/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <list>
#include <string>

#include <Eigen/Core>

#include "hardi/errors.hpp"
#include "hardi/parallel.hpp"
#include "kernel_math.hpp"

namespace hardi {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kTau = 1e-12;
constexpr double kMinSigma = 1e-12;

// LRU cache of Q columns, Q_it = y_i y_t K(x_i, x_t).
class QColumnCache {
 public:
  QColumnCache(std::span<const double> points, std::size_t n, std::span<const int> labels,
               double gamma, std::size_t cache_bytes, std::size_t max_evaluations)
      : points_(points.data(), static_cast<Eigen::Index>(labels.size()),
                static_cast<Eigen::Index>(n)),
        labels_(labels),
        gamma_(gamma),
        max_evaluations_(max_evaluations),
        slot_of_(labels.size(), kNoSlot),
        where_(labels.size()) {
    const std::size_t rows = labels.size();
    squared_norms_ = points_.rowwise().squaredNorm();
    const std::size_t column_bytes = std::max<std::size_t>(rows * sizeof(double), 1);
    capacity_ = std::clamp<std::size_t>(cache_bytes / column_bytes, 2, std::max<std::size_t>(rows, 2));
  }

  const double* column(std::size_t i) {
    if (slot_of_[i] != kNoSlot) {
      lru_.splice(lru_.begin(), lru_, where_[i]);
      return slots_[slot_of_[i]].data();
    }
    std::size_t slot;
    if (slots_.size() < capacity_) {
      slot = slots_.size();
      slots_.emplace_back(labels_.size());
    } else {
      const std::size_t victim = lru_.back();
      lru_.pop_back();
      slot = slot_of_[victim];
      slot_of_[victim] = kNoSlot;
    }
    fill(i, slots_[slot]);
    slot_of_[i] = slot;
    lru_.push_front(i);
    where_[i] = lru_.begin();
    return slots_[slot].data();
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  static constexpr std::size_t kNoSlot = std::numeric_limits<std::size_t>::max();

  void fill(std::size_t i, std::vector<double>& out) {
    const std::size_t rows = labels_.size();
    evaluations_ += rows;
    if (evaluations_ > max_evaluations_) {
      throw NumericalError("SMO did not converge within " + std::to_string(max_evaluations_) +
                           " kernel evaluations");
    }
    Eigen::Map<Eigen::VectorXd> dots(out.data(), static_cast<Eigen::Index>(rows));
    dots.noalias() = points_ * points_.row(static_cast<Eigen::Index>(i)).transpose();
    detail::gaussian_from_dots(out.data(), squared_norms_.data(),
                               squared_norms_[static_cast<Eigen::Index>(i)], gamma_, labels_.data(),
                               labels_[i], rows);
  }

  Eigen::Map<const RowMatrix> points_;
  Eigen::VectorXd squared_norms_;
  std::span<const int> labels_;
  double gamma_;
  std::size_t max_evaluations_;
  std::size_t evaluations_ = 0;
  std::size_t capacity_ = 2;
  std::vector<std::vector<double>> slots_;
  std::vector<std::size_t> slot_of_;
  std::list<std::size_t> lru_;
  std::vector<std::list<std::size_t>::iterator> where_;
};

double gaussian_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

}  // namespace

void SvmConfig::validate() const {
  require(C > 0.0 && std::isfinite(C), "SVM C must be > 0");
  require(std::isfinite(gamma), "SVM gamma must be finite");
  require(tolerance > 0.0, "SVM tolerance must be > 0");
  require(max_kernel_evaluations > 0, "SVM kernel evaluation cap must be > 0");
}

void Normalizer::apply(std::span<const double> in, std::span<double> out) const {
  require(in.size() == n() && out.size() == n(), "feature vector length does not match normalizer");
  for (std::size_t k = 0; k < n(); ++k) out[k] = (in[k] - mu[k]) / sigma[k];
}

std::vector<double> Normalizer::apply_all(std::span<const double> values) const {
  require(n() > 0 && values.size() % n() == 0, "value buffer is not a whole number of samples");
  std::vector<double> out(values.size());
  for (std::size_t off = 0; off < values.size(); off += n()) {
    apply(values.subspan(off, n()), {out.data() + off, n()});
  }
  return out;
}

Normalizer fit_normalizer(const Dataset& train) {
  require(train.size() > 0, "cannot fit a normalizer on an empty dataset");
  const std::size_t n = train.n;
  const double count = static_cast<double>(train.size());
  Normalizer out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t s = 0; s < train.size(); ++s) {
    const auto x = train.sample(s);
    for (std::size_t k = 0; k < n; ++k) out.mu[k] += x[k];
  }
  for (auto& m : out.mu) m /= count;
  for (std::size_t s = 0; s < train.size(); ++s) {
    const auto x = train.sample(s);
    for (std::size_t k = 0; k < n; ++k) {
      const double d = x[k] - out.mu[k];
      out.sigma[k] += d * d;
    }
  }
  for (auto& sd : out.sigma) {
    sd = std::sqrt(sd / count);
    if (sd < kMinSigma) sd = 1.0;
  }
  return out;
}

BinarySolution solve_binary(std::span<const double> points, std::size_t n,
                            std::span<const int> labels, double C, double gamma,
                            double tolerance, std::size_t max_kernel_evaluations,
                            std::size_t cache_megabytes) {
  const std::size_t rows = labels.size();
  require(rows > 0 && points.size() == rows * n, "binary problem points do not match labels");
  for (int y : labels) require(y == 1 || y == -1, "binary labels must be +1 or -1");

  QColumnCache cache(points, n, labels, gamma, cache_megabytes << 20, max_kernel_evaluations);
  BinarySolution out;
  out.alpha.assign(rows, 0.0);
  auto& alpha = out.alpha;
  std::vector<double> grad(rows, -1.0);
  // Gaussian kernel: Q_tt = K(x_t, x_t) = 1.
  constexpr double kDiag = 1.0;

  auto in_up = [&](std::size_t t) {
    return labels[t] == 1 ? alpha[t] < C : alpha[t] > 0.0;
  };
  auto in_low = [&](std::size_t t) {
    return labels[t] == 1 ? alpha[t] > 0.0 : alpha[t] < C;
  };

  for (;;) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = rows;
    for (std::size_t t = 0; t < rows; ++t) {
      if (!in_up(t)) continue;
      const double v = -labels[t] * grad[t];
      if (v > gmax) {
        gmax = v;
        i = t;
      }
    }
    if (i == rows) break;

    const double* q_i = cache.column(i);
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_decrease = std::numeric_limits<double>::infinity();
    std::size_t j = rows;
    for (std::size_t t = 0; t < rows; ++t) {
      if (!in_low(t)) continue;
      const double v = labels[t] * grad[t];
      gmax2 = std::max(gmax2, v);
      const double grad_diff = gmax + v;
      if (grad_diff > 0.0) {
        double curvature = 2.0 * kDiag - 2.0 * labels[i] * labels[t] * q_i[t];
        if (curvature <= 0.0) curvature = kTau;
        const double decrease = -(grad_diff * grad_diff) / curvature;
        if (decrease < best_decrease) {
          best_decrease = decrease;
          j = t;
        }
      }
    }
    if (gmax + gmax2 < tolerance || j == rows) break;

    const double* q_j = cache.column(j);
    q_i = cache.column(i);
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (labels[i] != labels[j]) {
      double curvature = 2.0 * kDiag + 2.0 * q_i[j];
      if (curvature <= 0.0) curvature = kTau;
      const double delta = (-grad[i] - grad[j]) / curvature;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double curvature = 2.0 * kDiag - 2.0 * q_i[j];
      if (curvature <= 0.0) curvature = kTau;
      const double delta = (grad[i] - grad[j]) / curvature;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double d_i = alpha[i] - old_ai;
    const double d_j = alpha[j] - old_aj;
    for (std::size_t t = 0; t < rows; ++t) grad[t] += q_i[t] * d_i + q_j[t] * d_j;
    ++out.iterations;
  }

  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < rows; ++t) {
    const double yg = labels[t] * grad[t];
    if (alpha[t] >= C) {
      if (labels[t] == -1) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (labels[t] == 1) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  double rho;
  if (free_count > 0) {
    rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(upper) && std::isfinite(lower)) {
    rho = (upper + lower) / 2.0;
  } else {
    rho = std::isfinite(upper) ? upper : (std::isfinite(lower) ? lower : 0.0);
  }
  out.bias = -rho;

  double objective = 0.0;
  for (std::size_t t = 0; t < rows; ++t) objective += alpha[t] * (grad[t] - 1.0);
  out.objective = objective / 2.0;
  out.kernel_evaluations = cache.evaluations();
  return out;
}

double dual_objective(std::span<const double> points, std::size_t n, std::span<const int> labels,
                      std::span<const double> alpha, double gamma) {
  const std::size_t rows = labels.size();
  double quad = 0.0;
  double linear = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    linear += alpha[i];
    for (std::size_t j = 0; j < rows; ++j) {
      quad += alpha[i] * alpha[j] * labels[i] * labels[j] *
              gaussian_kernel(points.subspan(i * n, n), points.subspan(j * n, n), gamma);
    }
  }
  return 0.5 * quad - linear;
}

SvmModel train_svm(const Dataset& train, const SvmConfig& config, std::size_t threads) {
  train.validate();
  config.validate();
  const auto hist = train.histogram();
  const auto present = std::count_if(hist.begin(), hist.end(), [](std::size_t c) { return c > 0; });
  require(present >= 2, "training set needs at least 2 distinct classes");

  const std::size_t n = train.n;
  bool all_identical = true;
  for (std::size_t s = 1; s < train.size() && all_identical; ++s) {
    all_identical = std::equal(train.sample(s).begin(), train.sample(s).end(), train.sample(0).begin());
  }
  if (all_identical) throw NumericalError("all training samples are identical; the SVM is undefined");

  SvmModel model;
  model.normalizer = fit_normalizer(train);
  model.config = config;
  model.n = n;
  model.gamma = config.resolved_gamma(n);
  const auto normalized = model.normalizer.apply_all(train.values);

  struct PairResult {
    BinaryClassifier binary;
    std::vector<std::size_t> members;
    std::vector<double> coef_all;
  };
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < kNumClasses; ++a) {
    for (int b = a + 1; b < kNumClasses; ++b) pairs.emplace_back(a, b);
  }
  std::vector<PairResult> results(pairs.size());

  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [a, b] = pairs[p];
    auto& r = results[p];
    r.binary.positive = a;
    r.binary.negative = b;
    if (hist[static_cast<std::size_t>(a)] == 0 || hist[static_cast<std::size_t>(b)] == 0) {
      r.binary.degenerate = true;
      r.binary.constant_vote = hist[static_cast<std::size_t>(a)] > 0 ? a : (hist[static_cast<std::size_t>(b)] > 0 ? b : a);
      return;
    }
    std::vector<double> points;
    std::vector<int> labels;
    for (std::size_t s = 0; s < train.size(); ++s) {
      if (train.labels[s] != a && train.labels[s] != b) continue;
      r.members.push_back(s);
      labels.push_back(train.labels[s] == a ? 1 : -1);
      points.insert(points.end(), normalized.begin() + static_cast<std::ptrdiff_t>(s * n),
                    normalized.begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
    }
    const auto sol = solve_binary(points, n, labels, config.C, model.gamma, config.tolerance,
                                  config.max_kernel_evaluations, config.cache_megabytes);
    r.binary.bias = sol.bias;
    r.binary.objective = sol.objective;
    r.coef_all.resize(labels.size());
    for (std::size_t t = 0; t < labels.size(); ++t) r.coef_all[t] = sol.alpha[t] * labels[t];
  });

  std::vector<std::size_t> pool_of(train.size(), std::numeric_limits<std::size_t>::max());
  for (auto& r : results) {
    for (std::size_t t = 0; t < r.members.size(); ++t) {
      if (r.coef_all[t] == 0.0) continue;
      const std::size_t s = r.members[t];
      if (pool_of[s] == std::numeric_limits<std::size_t>::max()) {
        pool_of[s] = model.n_support_vectors();
        model.support_vectors.insert(model.support_vectors.end(),
                                     normalized.begin() + static_cast<std::ptrdiff_t>(s * n),
                                     normalized.begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
      }
      r.binary.sv_index.push_back(pool_of[s]);
      r.binary.coef.push_back(r.coef_all[t]);
    }
    model.binaries.push_back(std::move(r.binary));
  }
  return model;
}

namespace {

std::array<int, kNumClasses> tally_normalized(const SvmModel& model, std::span<const double> x,
                                              std::vector<double>& kernel) {
  const std::size_t nsv = model.n_support_vectors();
  kernel.resize(nsv);
  for (std::size_t k = 0; k < nsv; ++k) kernel[k] = gaussian_kernel(model.support_vector(k), x, model.gamma);
  std::array<int, kNumClasses> votes{};
  for (const auto& b : model.binaries) {
    if (b.degenerate) {
      ++votes[static_cast<std::size_t>(b.constant_vote)];
      continue;
    }
    double f = b.bias;
    for (std::size_t k = 0; k < b.sv_index.size(); ++k) f += b.coef[k] * kernel[b.sv_index[k]];
    ++votes[static_cast<std::size_t>(f > 0.0 ? b.positive : b.negative)];
  }
  return votes;
}

int winner(const std::array<int, kNumClasses>& votes) {
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

}  // namespace

std::array<int, kNumClasses> vote_tally(const SvmModel& model, std::span<const double> raw) {
  require(raw.size() == model.n, "feature vector has length " + std::to_string(raw.size()) +
                                     ", model expects " + std::to_string(model.n));
  std::vector<double> x(model.n);
  model.normalizer.apply(raw, x);
  std::vector<double> kernel;
  return tally_normalized(model, x, kernel);
}

int predict(const SvmModel& model, std::span<const double> raw) {
  return winner(vote_tally(model, raw));
}

std::vector<int> predict_batch(const SvmModel& model, const Dataset& data, std::size_t threads) {
  require(data.n == model.n, "dataset has " + std::to_string(data.n) +
                                 " features, model expects " + std::to_string(model.n));
  const std::size_t n = model.n;
  const auto nsv = static_cast<Eigen::Index>(model.n_support_vectors());
  Eigen::Map<const RowMatrix> svs(model.support_vectors.data(), nsv, static_cast<Eigen::Index>(n));
  const Eigen::VectorXd sv_norms = svs.rowwise().squaredNorm();

  std::vector<int> out(data.size());
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (data.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(data.size(), begin + kChunk);
    const auto rows = static_cast<Eigen::Index>(end - begin);
    RowMatrix x(rows, static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < rows; ++r) {
      model.normalizer.apply(data.sample(begin + static_cast<std::size_t>(r)), {x.row(r).data(), n});
    }
    RowMatrix kernel = x * svs.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      detail::gaussian_from_dots(kernel.row(r).data(), sv_norms.data(), x.row(r).squaredNorm(),
                                 model.gamma, nullptr, 1, static_cast<std::size_t>(nsv));
      std::array<int, kNumClasses> votes{};
      for (const auto& b : model.binaries) {
        if (b.degenerate) {
          ++votes[static_cast<std::size_t>(b.constant_vote)];
          continue;
        }
        double f = b.bias;
        for (std::size_t k = 0; k < b.sv_index.size(); ++k) {
          f += b.coef[k] * kernel(r, static_cast<Eigen::Index>(b.sv_index[k]));
        }
        ++votes[static_cast<std::size_t>(f > 0.0 ? b.positive : b.negative)];
      }
      out[begin + static_cast<std::size_t>(r)] = winner(votes);
    }
  });
  return out;
}

nlohmann::json to_json(const SvmModel& model) {
  using nlohmann::json;
  json svs = json::array();
  for (std::size_t k = 0; k < model.n_support_vectors(); ++k) {
    const auto sv = model.support_vector(k);
    svs.push_back(std::vector<double>(sv.begin(), sv.end()));
  }
  json binaries = json::array();
  for (const auto& b : model.binaries) {
    binaries.push_back({{"positive", b.positive},
                        {"negative", b.negative},
                        {"sv_index", b.sv_index},
                        {"coef", b.coef},
                        {"bias", b.bias},
                        {"objective", b.objective},
                        {"degenerate", b.degenerate},
                        {"constant_vote", b.constant_vote}});
  }
  return {{"n", model.n},
          {"gamma", model.gamma},
          {"config",
           {{"C", model.config.C},
            {"gamma", model.config.gamma},
            {"tolerance", model.config.tolerance},
            {"max_kernel_evaluations", model.config.max_kernel_evaluations}}},
          {"normalizer", {{"mu", model.normalizer.mu}, {"sigma", model.normalizer.sigma}}},
          {"classes", {0, 1, 2, 3}},
          {"support_vectors", svs},
          {"binaries", binaries}};
}

SvmModel model_from_json(const nlohmann::json& j) {
  try {
    SvmModel model;
    model.n = j.at("n").get<std::size_t>();
    model.gamma = j.at("gamma").get<double>();
    const auto& cfg = j.at("config");
    model.config.C = cfg.at("C").get<double>();
    model.config.gamma = cfg.at("gamma").get<double>();
    model.config.tolerance = cfg.at("tolerance").get<double>();
    model.config.max_kernel_evaluations = cfg.at("max_kernel_evaluations").get<std::size_t>();
    model.normalizer.mu = j.at("normalizer").at("mu").get<std::vector<double>>();
    model.normalizer.sigma = j.at("normalizer").at("sigma").get<std::vector<double>>();
    for (const auto& sv : j.at("support_vectors")) {
      const auto row = sv.get<std::vector<double>>();
      if (row.size() != model.n) throw FormatError("support vector length does not match n");
      model.support_vectors.insert(model.support_vectors.end(), row.begin(), row.end());
    }
    for (const auto& jb : j.at("binaries")) {
      BinaryClassifier b;
      b.positive = jb.at("positive").get<int>();
      b.negative = jb.at("negative").get<int>();
      b.sv_index = jb.at("sv_index").get<std::vector<std::size_t>>();
      b.coef = jb.at("coef").get<std::vector<double>>();
      b.bias = jb.at("bias").get<double>();
      b.objective = jb.value("objective", 0.0);
      b.degenerate = jb.at("degenerate").get<bool>();
      b.constant_vote = jb.at("constant_vote").get<int>();
      if (b.sv_index.size() != b.coef.size()) throw FormatError("sv_index/coef length mismatch");
      for (auto k : b.sv_index) {
        if (k >= model.n_support_vectors()) throw FormatError("support vector index out of range");
      }
      model.binaries.push_back(std::move(b));
    }
    if (model.normalizer.mu.size() != model.n || model.normalizer.sigma.size() != model.n) {
      throw FormatError("normalizer length does not match n");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed SVM model JSON: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(model).dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

SvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model " + path.string());
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("malformed model " + path.string() + ": " + e.what());
  }
}

}  // namespace hardi
