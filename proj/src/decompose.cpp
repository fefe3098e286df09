#include "modekit/decompose.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <string>

#include "modekit/parallel.hpp"

namespace modekit {

namespace {

constexpr std::size_t kReductionBlock = 64;

// A residue whose peak-to-peak range is below this fraction of the input
// peak is constant up to rounding; its jitter would otherwise be sifted
// into an endless series of ~1e-20 modes.
constexpr double kFlatResidueTolerance = 1e-10;

using Clock = std::chrono::steady_clock;

struct EmdRun {
  std::vector<std::vector<double>> modes;
  std::vector<double> residue;
  std::vector<int> iterations;
  std::vector<StopReason> reasons;
  long long total_iterations = 0;
};

double peak(std::span<const double> x) noexcept {
  double m = 0.0;
  for (const double v : x) m = std::max(m, std::abs(v));
  return m;
}

// True once the residue is flat to working precision. The rounding-level
// remainder is moved into the last mode so the residue is exactly constant;
// sum(modes) + residue changes only at rounding level.
bool settle_flat_residue(std::vector<double>& residue, std::vector<std::vector<double>>& modes,
                         double scale) {
  const auto [lo, hi] = std::minmax_element(residue.begin(), residue.end());
  if (*hi - *lo > kFlatResidueTolerance * scale) return false;
  if (modes.empty() || *hi == *lo) return true;
  double level = 0.0;
  for (const double v : residue) level += v;
  level /= static_cast<double>(residue.size());
  auto& last = modes.back();
  for (std::size_t t = 0; t < residue.size(); ++t) {
    last[t] += residue[t] - level;
    residue[t] = level;
  }
  return true;
}

EmdRun emd_core(std::span<const double> x, const StopCriterion& criterion, int max_modes) {
  EmdRun run;
  run.residue.assign(x.begin(), x.end());
  const double scale = peak(x);
  while (static_cast<int>(run.modes.size()) < max_modes) {
    if (settle_flat_residue(run.residue, run.modes, scale)) break;
    // Two or more extrema imply at least one max and one min (alternation).
    if (find_extrema(run.residue).count() <= 1) break;
    SiftResult sift = extract_imf(run.residue, criterion);
    for (std::size_t t = 0; t < run.residue.size(); ++t) run.residue[t] -= sift.imf[t];
    run.iterations.push_back(sift.iterations);
    run.reasons.push_back(sift.stop_reason);
    run.total_iterations += sift.iterations;
    run.modes.push_back(std::move(sift.imf));
  }
  if (static_cast<int>(run.modes.size()) == max_modes) {
    settle_flat_residue(run.residue, run.modes, scale);
  }
  return run;
}

double population_std(std::span<const double> x) noexcept {
  if (x.empty()) return 0.0;
  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (const double v : x) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(x.size()));
}

// Accumulates per-mode statistics in realization order.
struct ModeTally {
  long long iterations = 0;
  std::array<long long, 4> reasons{};

  void add(int iters, StopReason reason, long long weight = 1) {
    iterations += static_cast<long long>(iters) * weight;
    reasons[static_cast<std::size_t>(reason)] += weight;
  }

  ModeDiagnostics finish() const {
    const auto it = std::max_element(reasons.begin(), reasons.end());
    return {iterations, static_cast<StopReason>(it - reasons.begin())};
  }
};

void check_length(const Signal& signal) {
  if (signal.size() < kMinDecomposeLength) {
    throw Error(ErrorKind::signal_too_short,
                "decomposition needs at least " + std::to_string(kMinDecomposeLength) +
                    " samples, got " + std::to_string(signal.size()));
  }
}

double elapsed_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Decomposition make_shell(Method method, const Signal& signal, const StopCriterion& criterion,
                         int max_modes) {
  Decomposition d;
  d.method = method;
  d.sample_rate = signal.sample_rate();
  d.criterion = criterion;
  d.max_modes = max_modes;
  return d;
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::emd: return "emd";
    case Method::eemd: return "eemd";
    case Method::ceemdan: return "ceemdan";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "emd") return Method::emd;
  if (name == "eemd") return Method::eemd;
  if (name == "ceemdan") return Method::ceemdan;
  throw Error(ErrorKind::invalid_argument, "unknown method: " + std::string(name));
}

void EnsembleConfig::validate() const {
  noise.validate();
  criterion.validate();
  if (max_modes < 1) throw Error(ErrorKind::invalid_argument, "max_modes must be >= 1");
}

std::vector<double> Decomposition::reconstruction() const {
  std::vector<double> sum = residue;
  for (const auto& mode : imfs) {
    for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += mode[t];
  }
  return sum;
}

std::vector<double> emd_first_mode(std::span<const double> x, const StopCriterion& criterion) {
  return extract_imf(x, criterion).imf;
}

Decomposition emd(const Signal& signal, const StopCriterion& criterion, int max_modes) {
  const auto start = Clock::now();
  check_length(signal);
  criterion.validate();
  if (max_modes < 1) throw Error(ErrorKind::invalid_argument, "max_modes must be >= 1");

  EmdRun run = emd_core(signal.samples(), criterion, max_modes);
  Decomposition d = make_shell(Method::emd, signal, criterion, max_modes);
  for (std::size_t k = 0; k < run.modes.size(); ++k) {
    d.modes.push_back({run.iterations[k], run.reasons[k]});
  }
  d.imfs = std::move(run.modes);
  d.residue = std::move(run.residue);
  d.total_iterations = run.total_iterations;
  d.elapsed_seconds = elapsed_since(start);
  return d;
}

Decomposition eemd(const Signal& signal, const EnsembleConfig& config) {
  const auto start = Clock::now();
  check_length(signal);
  config.validate();

  const auto x = signal.samples();
  const std::size_t n = x.size();
  const std::size_t nr = static_cast<std::size_t>(config.noise.nr);
  const double target_std = config.scale == NoiseScale::relative ? population_std(x) : 1.0;

  std::vector<std::vector<double>> mode_sums;
  std::vector<double> residue_sum(n, 0.0);
  std::vector<ModeTally> tallies;
  long long total_iterations = 0;

  auto accumulate = [&](const EmdRun& run, long long weight) {
    if (mode_sums.size() < run.modes.size()) {
      mode_sums.resize(run.modes.size(), std::vector<double>(n, 0.0));
      tallies.resize(run.modes.size());
    }
    for (std::size_t k = 0; k < run.modes.size(); ++k) {
      for (std::size_t t = 0; t < n; ++t) mode_sums[k][t] += run.modes[k][t];
      tallies[k].add(run.iterations[k], run.reasons[k], weight);
    }
    for (std::size_t t = 0; t < n; ++t) residue_sum[t] += run.residue[t];
    total_iterations += run.total_iterations * weight;
  };

  Decomposition d = make_shell(Method::eemd, signal, config.criterion, config.max_modes);
  d.noise = config.noise;
  d.scale = config.scale;

  if (config.noise.nstd == 0.0 || target_std == 0.0) {
    // Every realization equals the plain decomposition.
    EmdRun run = emd_core(x, config.criterion, config.max_modes);
    accumulate(run, static_cast<long long>(nr));
    d.imfs = std::move(run.modes);
    d.residue = std::move(run.residue);
  } else {
    std::vector<EmdRun> block;
    for (std::size_t first = 0; first < nr; first += kReductionBlock) {
      const std::size_t count = std::min(kReductionBlock, nr - first);
      block.assign(count, EmdRun{});
      parallel_for(count, config.threads, [&](std::size_t j) {
        std::vector<double> noisy = realization(config.noise, first + j, n, target_std);
        for (std::size_t t = 0; t < n; ++t) noisy[t] += x[t];
        block[j] = emd_core(noisy, config.criterion, config.max_modes);
      });
      for (const EmdRun& run : block) accumulate(run, 1);
    }
    const double inv = 1.0 / static_cast<double>(nr);
    for (auto& sum : mode_sums) {
      for (double& v : sum) v *= inv;
    }
    for (double& v : residue_sum) v *= inv;
    d.imfs = std::move(mode_sums);
    d.residue = std::move(residue_sum);
  }

  for (const auto& tally : tallies) d.modes.push_back(tally.finish());
  d.total_iterations = total_iterations;
  d.elapsed_seconds = elapsed_since(start);
  return d;
}

Decomposition ceemdan(const Signal& signal, const EnsembleConfig& config) {
  const auto start = Clock::now();
  check_length(signal);
  config.validate();

  const auto x = signal.samples();
  const std::size_t n = x.size();
  const NoisePlan& plan = config.noise;
  const bool noisy = plan.nstd > 0.0;
  // With zero noise all realizations coincide; one stands in for all.
  const std::size_t nr = noisy ? static_cast<std::size_t>(plan.nr) : 1;
  const long long weight = noisy ? 1 : plan.nr;

  Decomposition d = make_shell(Method::ceemdan, signal, config.criterion, config.max_modes);
  d.noise = plan;
  d.scale = config.scale;

  auto white = [&](std::size_t i) {
    return standard_normal(realization_seed(plan.master_seed, i), n);
  };

  // E_k(w_i): full EMD of each unit-variance noise realization.
  std::vector<std::vector<std::vector<double>>> noise_modes(noisy ? nr : 0);
  if (noisy) {
    std::vector<long long> noise_iters(nr, 0);
    parallel_for(nr, config.threads, [&](std::size_t i) {
      EmdRun run = emd_core(white(i), config.criterion, config.max_modes);
      noise_iters[i] = run.total_iterations;
      noise_modes[i] = std::move(run.modes);
    });
    for (const long long it : noise_iters) d.total_iterations += it;
  }

  std::vector<double> residue(x.begin(), x.end());
  const double scale = peak(x);
  std::vector<std::vector<double>> firsts(nr);
  std::vector<int> iters(nr);
  std::vector<StopReason> reasons(nr);
  std::vector<char> produced(nr);

  for (std::size_t k = 0; static_cast<int>(d.imfs.size()) < config.max_modes; ++k) {
    if (settle_flat_residue(residue, d.imfs, scale)) break;
    if (find_extrema(residue).count() <= 1) break;

    const double ref = config.scale == NoiseScale::relative ? population_std(residue) : 1.0;
    const double eps = plan.nstd * ref;

    parallel_for(nr, config.threads, [&](std::size_t i) {
      std::vector<double> y = residue;
      if (noisy) {
        if (k == 0) {
          const std::vector<double> w = white(i);
          for (std::size_t t = 0; t < n; ++t) y[t] += eps * w[t];
        } else if (k - 1 < noise_modes[i].size()) {
          const std::vector<double>& e = noise_modes[i][k - 1];
          for (std::size_t t = 0; t < n; ++t) y[t] += eps * e[t];
        }
      }
      produced[i] = 0;
      iters[i] = 0;
      try {
        SiftResult sift = extract_imf(y, config.criterion);
        iters[i] = sift.iterations;
        reasons[i] = sift.stop_reason;
        firsts[i] = std::move(sift.imf);
        produced[i] = 1;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::too_few_extrema) throw;
      }
    });

    std::vector<double> mode(n, 0.0);
    ModeTally tally;
    std::size_t contributors = 0;
    for (std::size_t i = 0; i < nr; ++i) {
      if (!produced[i]) continue;
      ++contributors;
      for (std::size_t t = 0; t < n; ++t) mode[t] += firsts[i][t];
      tally.add(iters[i], reasons[i], weight);
    }
    if (contributors == 0) break;
    if (nr > 1) {
      const double inv = 1.0 / static_cast<double>(nr);
      for (double& v : mode) v *= inv;
    }

    for (std::size_t t = 0; t < n; ++t) residue[t] -= mode[t];
    d.total_iterations += tally.iterations;
    d.modes.push_back(tally.finish());
    d.imfs.push_back(std::move(mode));
  }
  if (static_cast<int>(d.imfs.size()) == config.max_modes) {
    settle_flat_residue(residue, d.imfs, scale);
  }

  d.residue = std::move(residue);
  d.elapsed_seconds = elapsed_since(start);
  return d;
}

}  // namespace modekit
