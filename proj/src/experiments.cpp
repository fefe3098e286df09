#include "modekit/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "json_io.hpp"
#include "modekit/metrics.hpp"
#include "modekit/noise.hpp"
#include "modekit/parallel.hpp"

namespace modekit {

using json = nlohmann::json;

namespace {

std::size_t sample_count(double fs, double duration) {
  if (!(duration > 0.0) || !(fs > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "duration and sample rate must be positive");
  }
  const auto n = std::llround(duration * fs);
  if (n < 1) throw Error(ErrorKind::invalid_argument, "duration shorter than one sample");
  return static_cast<std::size_t>(n);
}

std::vector<double> add(std::vector<double> a, std::span<const double> b, double gain = 1.0) {
  for (std::size_t t = 0; t < a.size(); ++t) a[t] += gain * b[t];
  return a;
}

std::vector<double> to_vector(const Signal& s) {
  return {s.samples().begin(), s.samples().end()};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::parse_error, "line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view text, std::size_t line) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    parse_fail(line, "malformed number '" + std::string(text) + "'");
  }
  if (!std::isfinite(v)) parse_fail(line, "non-finite value '" + std::string(text) + "'");
  return v;
}

}  // namespace

Signal gen_two_tone(double f1, double f2, double fs, double duration, double a1, double a2) {
  if (!(f1 >= 0.0) || !(f1 < f2)) {
    throw Error(ErrorKind::invalid_argument, "two-tone needs 0 <= f1 < f2");
  }
  if (f2 >= fs / 2.0) {
    throw Error(ErrorKind::aliasing_violation, "f2 must be below the Nyquist frequency");
  }
  const std::size_t n = sample_count(fs, duration);
  std::vector<double> x(n);
  const double w1 = 2.0 * std::numbers::pi * f1;
  const double w2 = 2.0 * std::numbers::pi * f2;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] = a1 * std::sin(w1 * t) + a2 * std::sin(w2 * t);
  }
  return Signal(std::move(x), fs);
}

Signal gen_amfm(double carrier, double am_rate, double fm_depth, double fs, double duration) {
  if (!(carrier > 0.0) || !(am_rate >= 0.0) || !(fm_depth >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "AM/FM parameters must be non-negative");
  }
  if (carrier + fm_depth * am_rate >= fs / 2.0) {
    throw Error(ErrorKind::aliasing_violation,
                "peak instantaneous frequency must be below the Nyquist frequency");
  }
  const std::size_t n = sample_count(fs, duration);
  std::vector<double> x(n);
  const double wc = 2.0 * std::numbers::pi * carrier;
  const double wm = 2.0 * std::numbers::pi * am_rate;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double mod = std::sin(wm * t);
    x[i] = (1.0 + 0.5 * mod) * std::sin(wc * t + fm_depth * mod);
  }
  return Signal(std::move(x), fs);
}

Signal gen_white_noise(double fs, double duration, std::uint64_t seed) {
  return Signal(standard_normal(seed, sample_count(fs, duration)), fs);
}

std::vector<NamedSignal> default_corpus() {
  const double len = static_cast<double>(kCorpusLength);
  auto dur = [len](double fs) { return len / fs; };
  auto noise = [&](double fs, std::uint64_t seed) {
    return to_vector(gen_white_noise(fs, dur(fs), seed));
  };

  std::vector<NamedSignal> c;
  c.push_back({"two_tone_5_40", gen_two_tone(5, 40, 400, dur(400))});
  c.push_back({"two_tone_3_25", gen_two_tone(3, 25, 650, dur(650), 1.0, 0.5)});
  c.push_back({"amfm_30", gen_amfm(30, 1.5, 2.0, 640, dur(640))});
  c.push_back({"amfm_60", gen_amfm(60, 3.0, 4.0, 680, dur(680))});
  c.push_back({"two_tone_noisy",
               Signal(add(to_vector(gen_two_tone(5, 40, 400, dur(400))), noise(400, 101), 0.1),
                      400)});
  c.push_back({"amfm_noisy",
               Signal(add(to_vector(gen_amfm(45, 2.0, 3.0, 620, dur(620))), noise(620, 102), 0.2),
                      620)});
  c.push_back({"tone_plus_amfm",
               Signal(add(to_vector(gen_two_tone(2, 12, 600, dur(600), 0.8, 1.0)),
                          to_vector(gen_amfm(80, 4.0, 3.0, 600, dur(600))), 0.5),
                      600)});
  c.push_back({"low_high", gen_two_tone(1, 90, 700, dur(700), 1.0, 0.3)});
  {
    auto x = to_vector(gen_amfm(20, 1.0, 1.0, 660, dur(660)));
    x = add(std::move(x), to_vector(gen_two_tone(4, 70, 660, dur(660))), 0.5);
    x = add(std::move(x), noise(660, 103), 0.3);
    c.push_back({"mixed_noisy", Signal(std::move(x), 660)});
  }
  {
    auto x = to_vector(gen_amfm(100, 5.0, 2.0, 690, dur(690)));
    x = add(std::move(x), to_vector(gen_two_tone(0.5, 8, 690, dur(690))), 0.5);
    x = add(std::move(x), noise(690, 104), 0.05);
    c.push_back({"amfm_fast_trend", Signal(std::move(x), 690)});
  }
  return c;
}

// ---------------------------------------------------------------------------

std::vector<Signal> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;

  std::optional<double> rate;
  std::vector<std::vector<double>> columns;
  std::size_t blank_run_start = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (!rate) {
      if (line.empty() && line_no == 1 && in.peek() == EOF) break;
      constexpr std::string_view kKey = "sample_rate=";
      if (line.substr(0, kKey.size()) != kKey) parse_fail(line_no, "missing 'sample_rate=' header");
      const double fs = parse_number(line.substr(kKey.size()), line_no);
      if (!(fs > 0.0)) parse_fail(line_no, "sample rate must be positive");
      rate = fs;
      continue;
    }
    if (line.empty()) {
      if (blank_run_start == 0) blank_run_start = line_no;
      continue;
    }
    if (blank_run_start != 0) parse_fail(blank_run_start, "blank line inside data");

    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      row.push_back(parse_number(line.substr(pos, comma - pos), line_no));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (columns.empty()) {
      columns.resize(row.size());
    } else if (row.size() != columns.size()) {
      parse_fail(line_no, "expected " + std::to_string(columns.size()) + " columns, found " +
                              std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) columns[c].push_back(row[c]);
  }

  if (!rate) throw Error(ErrorKind::empty_file, "file is empty");
  if (columns.empty()) throw Error(ErrorKind::empty_file, "file has a header but no samples");

  std::vector<Signal> out;
  out.reserve(columns.size());
  for (auto& col : columns) out.emplace_back(std::move(col), *rate);
  return out;
}

std::vector<Signal> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_csv(std::span<const std::vector<double>> columns, double sample_rate) {
  if (columns.empty()) throw Error(ErrorKind::invalid_argument, "no columns to write");
  const std::size_t n = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw Error(ErrorKind::length_mismatch, "columns differ in length");
  }
  std::string out = "sample_rate=" + format_double(sample_rate) + "\n";
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c > 0) out += ',';
      out += format_double(columns[c][t]);
    }
    out += '\n';
  }
  return out;
}

void save_csv(const std::filesystem::path& path, std::span<const Signal> signals) {
  std::vector<std::vector<double>> columns;
  for (const auto& s : signals) columns.push_back(to_vector(s));
  if (signals.empty()) throw Error(ErrorKind::invalid_argument, "no signals to write");
  write_file_atomic(path, format_csv(columns, signals.front().sample_rate()));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io_error, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorKind::io_error, "failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorKind::io_error, "cannot rename to " + path.string() + ": " + ec.message());
  }
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kDefaultSweepNstd = 0.2;
constexpr int kDefaultSweepNr = 500;

bool is_ensemble(Method m) { return m != Method::emd; }

}  // namespace

void SweepSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::invalid_argument, what); };
  if (grids.empty()) fail("empty sweep grid");
  if (signals.empty()) fail("sweep has no signals");
  if (max_modes < 1) fail("max_modes must be >= 1");
  for (const auto& g : grids) {
    if (method == Method::emd) {
      if (g.nstd.size() > 1) fail("nstd is not applicable to emd");
      if (g.nr.size() > 1) fail("nr is not applicable to emd");
    }
  }
  for (const auto& p : expand()) {
    p.criterion.validate();
    if (is_ensemble(method)) NoisePlan{master_seed, p.nr, p.nstd}.validate();
  }
}

std::vector<GridPoint> SweepSpec::expand() const {
  std::vector<GridPoint> points;
  const bool ensemble = is_ensemble(method);
  for (const auto& g : grids) {
    const std::vector<StopCriterion> criteria =
        g.criteria.empty() ? std::vector<StopCriterion>{StopCriterion{}} : g.criteria;
    const std::vector<double> nstds =
        ensemble ? (g.nstd.empty() ? std::vector<double>{kDefaultSweepNstd} : g.nstd)
                 : std::vector<double>{0.0};
    const std::vector<int> nrs =
        ensemble ? (g.nr.empty() ? std::vector<int>{kDefaultSweepNr} : g.nr) : std::vector<int>{0};
    const std::vector<int> iters = g.max_iter.empty() ? std::vector<int>{0} : g.max_iter;

    for (const auto& c : criteria) {
      for (const int mi : iters) {
        for (const double ns : nstds) {
          for (const int r : nrs) {
            GridPoint p{c, ns, r};
            if (mi > 0) p.criterion.max_iter = mi;
            points.push_back(p);
          }
        }
      }
    }
  }
  return points;
}

std::uint64_t job_seed(std::uint64_t master, std::size_t grid_index, std::size_t signal_index) {
  return realization_seed(realization_seed(master, grid_index), signal_index);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::vector<GridPoint> points = spec.expand();
  const std::size_t ns = spec.signals.size();
  const std::size_t jobs = points.size() * ns;

  std::vector<SweepRow> runs(jobs);
  const bool ensemble = is_ensemble(spec.method);

  auto run_job = [&](std::size_t j, int inner_threads) {
    const std::size_t g = j / ns;
    const std::size_t s = j % ns;
    const GridPoint& p = points[g];
    const NamedSignal& sig = spec.signals[s];

    SweepRow& row = runs[j];
    row.method = spec.method;
    row.criterion = p.criterion.label();
    row.nstd = p.nstd;
    row.nr = p.nr;
    row.max_iter = p.criterion.max_iter;
    row.signal_id = sig.id;
    row.grid_index = g;
    try {
      Decomposition d;
      if (!ensemble) {
        d = emd(sig.signal, p.criterion, spec.max_modes);
      } else {
        EnsembleConfig cfg;
        cfg.noise = {job_seed(spec.master_seed, g, s), p.nr, p.nstd};
        cfg.criterion = p.criterion;
        cfg.max_modes = spec.max_modes;
        cfg.threads = inner_threads;
        d = spec.method == Method::eemd ? eemd(sig.signal, cfg) : ceemdan(sig.signal, cfg);
      }
      const DecompositionReport rep = make_report(d, sig.signal);
      row.imf_count = static_cast<double>(rep.imf_count);
      row.iterations = static_cast<double>(rep.total_iterations);
      row.time_s = rep.elapsed_seconds;
      row.ecm = rep.ecm;
      row.io = rep.orthogonality_index;
      row.status = "ok";
      row.succeeded = 1;
    } catch (const Error& e) {
      row.status = std::string(to_string(e.kind()));
    } catch (const std::exception&) {
      row.status = "error";
    }
  };

  if (ensemble) {
    for (std::size_t j = 0; j < jobs; ++j) run_job(j, spec.threads);
  } else {
    parallel_for(jobs, spec.threads, [&](std::size_t j) { run_job(j, 1); });
  }

  std::vector<SweepRow> rows;
  rows.reserve(jobs + points.size());
  for (std::size_t g = 0; g < points.size(); ++g) {
    SweepRow agg = runs[g * ns];
    agg.signal_id = "mean";
    agg.aggregate = true;
    agg.status = "aggregate";
    agg.imf_count = agg.iterations = agg.time_s = agg.ecm = 0.0;
    agg.io.reset();
    agg.succeeded = 0;
    double io_sum = 0.0;
    std::size_t io_count = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      const SweepRow& r = runs[g * ns + s];
      rows.push_back(r);
      if (r.succeeded == 0) continue;
      ++agg.succeeded;
      agg.imf_count += r.imf_count;
      agg.iterations += r.iterations;
      agg.time_s += r.time_s;
      agg.ecm += r.ecm;
      if (r.io) {
        io_sum += *r.io;
        ++io_count;
      }
    }
    if (agg.succeeded > 0) {
      const double k = static_cast<double>(agg.succeeded);
      agg.imf_count /= k;
      agg.iterations /= k;
      agg.time_s /= k;
      agg.ecm /= k;
    }
    if (io_count > 0) agg.io = io_sum / static_cast<double>(io_count);
    rows.push_back(agg);
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::string out =
      "method,criterion,nstd,nr,max_iter,signal_id,imf_count,iterations,time_s,ecm,io,status,"
      "succeeded\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.method)) + ",\"" + r.criterion + "\"," + format_double(r.nstd) +
           "," + std::to_string(r.nr) + "," + std::to_string(r.max_iter) + "," + r.signal_id + "," +
           format_double(r.imf_count) + "," + format_double(r.iterations) + "," +
           format_double(r.time_s) + "," + format_double(r.ecm) + "," +
           (r.io ? format_double(*r.io) : std::string()) + "," + r.status + "," +
           std::to_string(r.succeeded) + "\n";
  }
  return out;
}

std::string sweep_to_json(std::span<const SweepRow> rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({
        {"method", to_string(r.method)},
        {"criterion", r.criterion},
        {"nstd", r.nstd},
        {"nr", r.nr},
        {"max_iter", r.max_iter},
        {"signal_id", r.signal_id},
        {"imf_count", r.imf_count},
        {"iterations", r.iterations},
        {"time_s", r.time_s},
        {"ecm", r.ecm},
        {"io", r.io ? json(*r.io) : json(nullptr)},
        {"status", r.status},
        {"succeeded", r.succeeded},
        {"grid_index", r.grid_index},
        {"aggregate", r.aggregate},
    });
  }
  return json{{"rows", arr}}.dump(2) + "\n";
}

SweepSpec parse_sweep_spec(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error, std::string("sweep spec: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::parse_error, "sweep spec must be a JSON object");

  try {
    SweepSpec spec;
    spec.method = parse_method(j.value("method", std::string("ceemdan")));
    spec.master_seed = j.value("master_seed", std::uint64_t{0});
    spec.max_modes = j.value("max_modes", kDefaultMaxModes);
    spec.threads = j.value("threads", 1);

    auto axis = [](const json& block, const char* key, auto& out) {
      if (!block.contains(key)) return;
      const json& v = block.at(key);
      if (!v.is_array()) throw Error(ErrorKind::parse_error, std::string(key) + " must be an array");
      if (v.empty()) throw Error(ErrorKind::invalid_argument, "empty sweep grid");
      for (const auto& e : v) out.push_back(e.get<typename std::decay_t<decltype(out)>::value_type>());
    };
    auto parse_block = [&](const json& b) {
      GridBlock g;
      if (b.contains("criteria")) {
        const json& cs = b.at("criteria");
        if (!cs.is_array()) throw Error(ErrorKind::parse_error, "criteria must be an array");
        if (cs.empty()) throw Error(ErrorKind::invalid_argument, "empty sweep grid");
        for (const auto& c : cs) g.criteria.push_back(criterion_from_json(c));
      }
      axis(b, "nstd", g.nstd);
      axis(b, "nr", g.nr);
      axis(b, "max_iter", g.max_iter);
      return g;
    };

    if (j.contains("grids")) {
      for (const auto& b : j.at("grids")) spec.grids.push_back(parse_block(b));
    } else {
      spec.grids.push_back(parse_block(j));
    }
    if (spec.grids.empty()) throw Error(ErrorKind::invalid_argument, "empty sweep grid");

    const json sig = j.value("signals", json("corpus"));
    if (sig.is_string() && sig.get<std::string>() == "corpus") {
      spec.signals = default_corpus();
    } else if (sig.is_array()) {
      const auto corpus = default_corpus();
      for (const auto& id : sig) {
        const std::string name = id.get<std::string>();
        auto it = std::find_if(corpus.begin(), corpus.end(),
                               [&](const NamedSignal& s) { return s.id == name; });
        if (it == corpus.end()) {
          throw Error(ErrorKind::invalid_argument, "unknown corpus signal: " + name);
        }
        spec.signals.push_back(*it);
      }
    } else if (sig.is_object() && sig.contains("csv")) {
      std::filesystem::path p = sig.at("csv").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      const auto loaded = load_csv(p);
      for (std::size_t i = 0; i < loaded.size(); ++i) {
        spec.signals.push_back({p.stem().string() + "_" + std::to_string(i), loaded[i]});
      }
    } else {
      throw Error(ErrorKind::parse_error,
                  "signals must be \"corpus\", a list of corpus ids or {\"csv\": path}");
    }
    return spec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse_error, std::string("sweep spec: ") + e.what());
  }
}

}  // namespace modekit
