#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modekit/decompose.hpp"
#include "modekit/signal.hpp"

namespace modekit {

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

/// a1 sin(2 pi f1 t) + a2 sin(2 pi f2 t), llround(duration * fs) samples.
/// Throws Error(aliasing_violation) if f2 >= fs / 2, Error(invalid_argument)
/// unless 0 <= f1 < f2 and duration > 0.
Signal gen_two_tone(double f1, double f2, double fs, double duration, double a1 = 1.0,
                    double a2 = 1.0);

/// (1 + 0.5 sin(2 pi am t)) sin(2 pi fc t + depth sin(2 pi am t)).
/// Throws Error(aliasing_violation) if fc + depth * am >= fs / 2.
Signal gen_amfm(double carrier, double am_rate, double fm_depth, double fs, double duration);

/// Unit-variance Gaussian samples.
Signal gen_white_noise(double fs, double duration, std::uint64_t seed);

struct NamedSignal {
  std::string id;
  Signal signal;
};

inline constexpr std::size_t kCorpusLength = 2048;

/// The ten-signal synthetic corpus (two-tone, AM/FM and noisy variants,
/// 2048 samples each). Entry 0 is the 5 Hz + 40 Hz two-tone at 400 Hz.
std::vector<NamedSignal> default_corpus();

// ---------------------------------------------------------------------------
// CSV signal files
//
//   sample_rate=<float>
//   v11,v12,...      one column per signal
// ---------------------------------------------------------------------------

/// Throws Error(parse_error) naming the line for malformed input,
/// Error(empty_file) without data rows, Error(io_error) if unreadable.
std::vector<Signal> load_csv(const std::filesystem::path& path);
std::vector<Signal> parse_csv(const std::string& text);

/// Shortest round-trip decimal form; at most 17 significant digits.
std::string format_double(double v);

/// Columns must share one length; the first column's sample rate is used.
std::string format_csv(std::span<const std::vector<double>> columns, double sample_rate);
void save_csv(const std::filesystem::path& path, std::span<const Signal> signals);

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

/// One Cartesian block of the sweep grid. An empty optional axis takes the
/// default (criterion defaults, nstd 0.2, nr 500, criterion max_iter).
struct GridBlock {
  std::vector<StopCriterion> criteria;
  std::vector<double> nstd;
  std::vector<int> nr;
  std::vector<int> max_iter;
};

struct GridPoint {
  StopCriterion criterion;
  double nstd = 0.0;
  int nr = 0;
};

struct SweepSpec {
  Method method = Method::ceemdan;
  std::vector<GridBlock> grids;
  std::vector<NamedSignal> signals;
  std::uint64_t master_seed = 0;
  int max_modes = kDefaultMaxModes;
  int threads = 1;

  /// Throws Error(invalid_argument) for an empty grid, empty signal list or
  /// a non-singleton nstd/nr axis under emd.
  void validate() const;
  /// Concatenation of the Cartesian products of each block.
  std::vector<GridPoint> expand() const;
};

struct SweepRow {
  Method method = Method::emd;
  std::string criterion;
  double nstd = 0.0;
  int nr = 0;
  int max_iter = 0;
  std::string signal_id;  // "mean" on aggregate rows
  double imf_count = 0.0;
  double iterations = 0.0;
  double time_s = 0.0;
  double ecm = 0.0;
  std::optional<double> io;
  std::string status;  // "ok", an error tag, or "aggregate"
  std::size_t succeeded = 0;  // successful runs behind the row
  std::size_t grid_index = 0;
  bool aggregate = false;
};

/// One row per (grid point, signal) followed by that grid point's aggregate
/// row, in grid order. Per-run failures become rows with the error tag;
/// aggregates average the successful runs only.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Seed of the job (grid point, signal).
std::uint64_t job_seed(std::uint64_t master, std::size_t grid_index, std::size_t signal_index);

/// Fixed column order: method, criterion, nstd, nr, max_iter, signal_id,
/// imf_count, iterations, time_s, ecm, io, status, succeeded.
std::string sweep_to_csv(std::span<const SweepRow> rows);
std::string sweep_to_json(std::span<const SweepRow> rows);

/// Sweep spec from JSON text; `base_dir` resolves relative CSV paths.
SweepSpec parse_sweep_spec(const std::string& json_text,
                           const std::filesystem::path& base_dir = ".");

}  // namespace modekit
