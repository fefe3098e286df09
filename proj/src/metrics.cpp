#include "modekit/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace modekit {

double ecm(const Decomposition& decomp, std::span<const double> original) {
  const std::size_t n = original.size();
  if (decomp.residue.size() != n) {
    throw Error(ErrorKind::length_mismatch, "ecm: decomposition and signal differ in length");
  }
  for (const auto& mode : decomp.imfs) {
    if (mode.size() != n) {
      throw Error(ErrorKind::length_mismatch, "ecm: mode length differs from signal");
    }
  }
  const std::vector<double> rec = decomp.reconstruction();
  double sum = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double e = original[t] - rec[t];
    sum += e * e;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double ecm(const Decomposition& decomp, const Signal& original) {
  return ecm(decomp, original.samples());
}

double orthogonality_index(const Decomposition& decomp) {
  if (decomp.imfs.empty()) {
    throw Error(ErrorKind::empty_decomposition, "orthogonality index needs at least one IMF");
  }
  const std::size_t n = decomp.residue.size();
  double cross = 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double sum = decomp.residue[t];
    double squares = sum * sum;
    for (const auto& mode : decomp.imfs) {
      sum += mode[t];
      squares += mode[t] * mode[t];
    }
    // sum_{j != k} c_j c_k = (sum c)^2 - sum c^2
    cross += sum * sum - squares;
    total += sum * sum;
  }
  return total == 0.0 ? 0.0 : cross / total;
}

double mean_period_samples(std::span<const double> mode) {
  const std::size_t extrema = find_extrema(mode).count();
  if (extrema < 2) {
    throw Error(ErrorKind::too_few_extrema, "mean period needs at least two extrema");
  }
  return 2.0 * static_cast<double>(mode.size()) / static_cast<double>(extrema);
}

double mean_period(std::span<const double> mode, double sample_rate) {
  return mean_period_samples(mode) / sample_rate;
}

std::pair<std::size_t, std::size_t> interior_window(std::size_t length, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "interior fraction must lie in (0, 1]");
  }
  const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(length)));
  const std::size_t begin = (length - keep) / 2;
  return {begin, begin + keep};
}

double mode_correlation(std::span<const double> mode, std::span<const double> reference,
                        double interior_fraction) {
  if (mode.size() != reference.size()) {
    throw Error(ErrorKind::length_mismatch, "mode_correlation: lengths differ");
  }
  const auto [begin, end] = interior_window(mode.size(), interior_fraction);
  const double count = static_cast<double>(end - begin);
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t t = begin; t < end; ++t) {
    ma += mode[t];
    mb += reference[t];
  }
  ma /= count;
  mb /= count;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t t = begin; t < end; ++t) {
    const double a = mode[t] - ma;
    const double b = reference[t] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw Error(ErrorKind::zero_variance, "mode_correlation: constant sequence on the window");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

DecompositionReport make_report(const Decomposition& decomp, const Signal& original) {
  DecompositionReport r;
  r.imf_count = decomp.imf_count();
  r.total_iterations = decomp.total_iterations;
  r.elapsed_seconds = decomp.elapsed_seconds;
  r.ecm = ecm(decomp, original);

  double power = 0.0;
  for (const double v : original.samples()) power += v * v;
  power /= static_cast<double>(original.size());
  r.ecm_relative = power > 0.0 ? r.ecm / power : 0.0;

  if (!decomp.imfs.empty()) r.orthogonality_index = orthogonality_index(decomp);

  for (std::size_t k = 0; k < decomp.imfs.size(); ++k) {
    ModeReport m;
    m.iterations = k < decomp.modes.size() ? decomp.modes[k].iterations : 0;
    const auto& mode = decomp.imfs[k];
    if (find_extrema(mode).count() >= 2) m.mean_period_samples = mean_period_samples(mode);
    for (const double v : mode) m.energy += v * v;
    r.per_mode.push_back(m);
  }
  return r;
}

}  // namespace modekit
