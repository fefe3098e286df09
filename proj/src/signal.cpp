#include "modekit/signal.hpp"

#include <cmath>
#include <string>

namespace modekit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::invalid_signal: return "invalid_signal";
    case ErrorKind::signal_too_short: return "signal_too_short";
    case ErrorKind::too_few_extrema: return "too_few_extrema";
    case ErrorKind::length_mismatch: return "length_mismatch";
    case ErrorKind::index_out_of_range: return "index_out_of_range";
    case ErrorKind::zero_variance: return "zero_variance";
    case ErrorKind::empty_decomposition: return "empty_decomposition";
    case ErrorKind::aliasing_violation: return "aliasing_violation";
    case ErrorKind::parse_error: return "parse_error";
    case ErrorKind::empty_file: return "empty_file";
    case ErrorKind::io_error: return "io_error";
  }
  return "unknown";
}

Signal::Signal(std::vector<double> samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (samples_.empty()) {
    throw Error(ErrorKind::invalid_signal, "signal must contain at least one sample");
  }
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
    throw Error(ErrorKind::invalid_signal, "sample rate must be positive and finite");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw Error(ErrorKind::invalid_signal,
                  "non-finite sample at index " + std::to_string(i));
    }
  }
}

namespace {

void find_extrema_into(std::span<const double> x, ExtremaSet& out) {
  out.maxima.clear();
  out.minima.clear();
  const std::size_t n = x.size();
  if (n < 3) return;

  std::size_t i = 1;
  while (i + 1 < n) {
    std::size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (j == n - 1) break;  // run reaches the right end

    const double v = x[i];
    const double left = x[i - 1];
    const double right = x[j + 1];
    const std::size_t mid = i + (j - i) / 2;
    if (v > left && v > right) {
      out.maxima.push_back({mid, v});
    } else if (v < left && v < right) {
      out.minima.push_back({mid, v});
    }
    i = j + 1;
  }
}

// Appends the mirrored/original knots of `knots` as positions on the real line.
void extend_knots(std::span<const Extremum> knots, std::size_t length, BoundaryPolicy boundary,
                  std::vector<double>& kx, std::vector<double>& ky) {
  kx.clear();
  ky.clear();
  const std::size_t m = knots.size();
  const double last = static_cast<double>(length - 1);

  if (boundary == BoundaryPolicy::mirror) {
    const std::size_t take = std::min<std::size_t>(2, m);
    for (std::size_t k = take; k-- > 0;) {
      if (knots[k].index == 0) continue;
      kx.push_back(-static_cast<double>(knots[k].index));
      ky.push_back(knots[k].value);
    }
  }
  for (const auto& k : knots) {
    kx.push_back(static_cast<double>(k.index));
    ky.push_back(k.value);
  }
  if (boundary == BoundaryPolicy::mirror) {
    const std::size_t take = std::min<std::size_t>(2, m);
    for (std::size_t k = 0; k < take; ++k) {
      const auto& src = knots[m - 1 - k];
      if (src.index == length - 1) continue;
      kx.push_back(2.0 * last - static_cast<double>(src.index));
      ky.push_back(src.value);
    }
  }
}

}  // namespace

ExtremaSet find_extrema(std::span<const double> x) {
  ExtremaSet out;
  find_extrema_into(x, out);
  return out;
}

std::size_t count_zero_crossings(std::span<const double> x) noexcept {
  std::size_t count = 0;
  int prev = 0;
  for (const double v : x) {
    const int s = (v > 0.0) - (v < 0.0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++count;
    prev = s;
  }
  return count;
}

namespace detail {

void natural_spline_sample(std::span<const double> kx, std::span<const double> ky,
                           std::span<double> out, std::vector<double>& m,
                           std::vector<double>& scratch) {
  const std::size_t k = kx.size();
  m.assign(k, 0.0);

  // Tridiagonal system for interior second derivatives (Thomas algorithm),
  // natural ends m[0] = m[k-1] = 0.
  if (k > 2) {
    const std::size_t interior = k - 2;
    scratch.resize(2 * interior);
    double* c = scratch.data();             // modified super-diagonal
    double* d = scratch.data() + interior;  // modified right-hand side
    for (std::size_t r = 0; r < interior; ++r) {
      const std::size_t i = r + 1;
      const double h0 = kx[i] - kx[i - 1];
      const double h1 = kx[i + 1] - kx[i];
      const double diag = 2.0 * (h0 + h1);
      const double rhs = 6.0 * ((ky[i + 1] - ky[i]) / h1 - (ky[i] - ky[i - 1]) / h0);
      if (r == 0) {
        c[r] = h1 / diag;
        d[r] = rhs / diag;
      } else {
        const double denom = diag - h0 * c[r - 1];
        c[r] = h1 / denom;
        d[r] = (rhs - h0 * d[r - 1]) / denom;
      }
    }
    m[interior] = d[interior - 1];
    for (std::size_t r = interior - 1; r-- > 0;) {
      m[r + 1] = d[r] - c[r] * m[r + 2];
    }
  }

  std::size_t seg = 0;
  for (std::size_t t = 0; t < out.size(); ++t) {
    const double pos = static_cast<double>(t);
    while (seg + 2 < k && pos > kx[seg + 1]) ++seg;
    const double x0 = kx[seg];
    const double x1 = kx[seg + 1];
    const double h = x1 - x0;
    const double a = x1 - pos;
    const double b = pos - x0;
    out[t] = (m[seg] * a * a * a + m[seg + 1] * b * b * b) / (6.0 * h) +
             (ky[seg] / h - m[seg] * h / 6.0) * a + (ky[seg + 1] / h - m[seg + 1] * h / 6.0) * b;
  }
}

bool compute_envelopes(std::span<const double> x, EnvelopeWorkspace& ws, EnvelopePair& env) {
  find_extrema_into(x, ws.extrema);
  if (ws.extrema.maxima.empty() || ws.extrema.minima.empty()) return false;

  const std::size_t n = x.size();
  env.upper.resize(n);
  env.lower.resize(n);
  env.mean.resize(n);
  env.amplitude.resize(n);

  extend_knots(ws.extrema.maxima, n, BoundaryPolicy::mirror, ws.knot_x, ws.knot_y);
  natural_spline_sample(ws.knot_x, ws.knot_y, env.upper, ws.second_deriv, ws.scratch);
  extend_knots(ws.extrema.minima, n, BoundaryPolicy::mirror, ws.knot_x, ws.knot_y);
  natural_spline_sample(ws.knot_x, ws.knot_y, env.lower, ws.second_deriv, ws.scratch);

  for (std::size_t t = 0; t < n; ++t) {
    env.mean[t] = 0.5 * (env.upper[t] + env.lower[t]);
    env.amplitude[t] = 0.5 * (env.upper[t] - env.lower[t]);
  }
  return true;
}

}  // namespace detail

std::vector<double> interpolate_envelope(std::span<const Extremum> knots, std::size_t length,
                                         BoundaryPolicy boundary) {
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (knots[i].index >= length) {
      throw Error(ErrorKind::invalid_argument, "knot index outside the sample range");
    }
    if (i > 0 && knots[i].index <= knots[i - 1].index) {
      throw Error(ErrorKind::invalid_argument, "knot indices must be strictly increasing");
    }
  }
  std::vector<double> kx;
  std::vector<double> ky;
  if (!knots.empty()) extend_knots(knots, length, boundary, kx, ky);
  if (kx.size() < 2) {
    throw Error(ErrorKind::too_few_extrema, "at least two knots are required for an envelope");
  }
  std::vector<double> out(length);
  std::vector<double> m;
  std::vector<double> scratch;
  detail::natural_spline_sample(kx, ky, out, m, scratch);
  return out;
}

EnvelopePair local_mean(std::span<const double> x) {
  detail::EnvelopeWorkspace ws;
  EnvelopePair env;
  if (!detail::compute_envelopes(x, ws, env)) {
    throw Error(ErrorKind::too_few_extrema,
                "envelopes need at least one maximum and one minimum");
  }
  return env;
}

}  // namespace modekit
