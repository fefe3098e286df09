#include "modekit/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "json_io.hpp"
#include "modekit/decompose.hpp"
#include "modekit/experiments.hpp"
#include "modekit/metrics.hpp"
#include "modekit/svg.hpp"

namespace modekit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Raised for anything detected before computation starts.
struct ConfigError {
  std::string tag;
  std::string message;
};

void print_error(std::ostream& err, const std::string& tag, const std::string& message) {
  err << json{{"error", tag}, {"message", message}}.dump() << "\n";
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError{"io_error", "cannot read " + p.string()};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("MODEKIT_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used, 10);
    if (used != std::string(v).size()) throw std::invalid_argument("trailing characters");
    return s;
  } catch (const std::exception&) {
    throw ConfigError{"invalid_argument", "MODEKIT_SEED is not an unsigned integer"};
  }
}

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError{"io_error", "cannot create output directory " + dir.string()};
  }
}

struct DecomposeOptions {
  std::string input;
  std::string output;
  std::string config;
  std::string method = "ceemdan";
  std::string criterion = "dual";
  int n = 10;
  int consecutive = 1;
  double sd = 0.2;
  double theta1 = 0.05;
  double theta2 = 0.5;
  double alpha = 0.05;
  int max_iter = kDefaultMaxIter;
  double nstd = 0.2;
  int nr = 500;
  std::uint64_t seed = 0;
  int max_modes = kDefaultMaxModes;
  int threads = 1;
  bool plot = false;
};

struct SweepOptions {
  std::string spec;
  std::string output;
  int threads = 1;
  std::uint64_t seed = 0;
  bool plot = false;
};

struct ReportOptions {
  std::string input;
  std::string plot;
};

bool given(const CLI::App* app, const char* flag) { return app->count(flag) > 0; }

// Applies config-file values to options not given on the command line and
// validates the combination. Returns the criterion and the chosen seed.
std::pair<StopCriterion, std::uint64_t> resolve_decompose(const CLI::App* app,
                                                          DecomposeOptions& o) {
  std::set<std::string> present;
  auto mark = [&](const char* flag, const char* key) {
    if (given(app, flag)) present.insert(key);
  };
  mark("--method", "method");
  mark("--criterion", "criterion");
  mark("--n", "n");
  mark("--consecutive", "consecutive");
  mark("--sd", "sd");
  mark("--theta1", "theta1");
  mark("--theta2", "theta2");
  mark("--alpha", "alpha");
  mark("--max-iter", "max_iter");
  mark("--nstd", "nstd");
  mark("--nr", "nr");
  mark("--seed", "seed");
  mark("--max-modes", "max_modes");
  mark("--threads", "threads");

  std::optional<std::uint64_t> seed;
  if (present.count("seed")) seed = o.seed;

  if (!o.config.empty()) {
    if (!fs::exists(o.config)) throw ConfigError{"io_error", "config not found: " + o.config};
    json cfg;
    try {
      cfg = json::parse(read_text(o.config));
    } catch (const json::parse_error& e) {
      throw ConfigError{"parse_error", std::string("config: ") + e.what()};
    }
    if (!cfg.is_object()) throw ConfigError{"parse_error", "config must be a JSON object"};
    try {
      auto take = [&](const char* key, auto& field) {
        if (cfg.contains(key) && !present.count(key)) {
          field = cfg.at(key).get<std::decay_t<decltype(field)>>();
          present.insert(key);
        }
      };
      take("method", o.method);
      take("criterion", o.criterion);
      take("n", o.n);
      take("consecutive", o.consecutive);
      take("sd", o.sd);
      take("theta1", o.theta1);
      take("theta2", o.theta2);
      take("alpha", o.alpha);
      take("max_iter", o.max_iter);
      take("nstd", o.nstd);
      take("nr", o.nr);
      take("max_modes", o.max_modes);
      take("threads", o.threads);
      if (!seed && cfg.contains("seed")) seed = cfg.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw ConfigError{"parse_error", std::string("config: ") + e.what()};
    }
  }
  if (!seed) seed = env_seed();

  try {
    parse_method(o.method);
  } catch (const Error& e) {
    throw ConfigError{"invalid_argument", e.what()};
  }
  if (o.method == "emd") {
    if (present.count("nr")) throw ConfigError{"invalid_argument", "nr is not applicable to emd"};
    if (present.count("nstd")) {
      throw ConfigError{"invalid_argument", "nstd is not applicable to emd"};
    }
  }

  auto reject = [&](const char* key) {
    if (present.count(key)) {
      throw ConfigError{"invalid_argument", std::string(key) + " is not applicable to criterion " +
                                                o.criterion};
    }
  };
  try {
    StopCriterion c;
    if (o.criterion == "fixed-check") {
      for (const char* k : {"sd", "theta1", "theta2", "alpha"}) reject(k);
      c = StopCriterion::fixed_with_imf_check(o.n, o.consecutive, o.max_iter);
    } else if (o.criterion == "fixed") {
      for (const char* k : {"consecutive", "sd", "theta1", "theta2", "alpha"}) reject(k);
      c = StopCriterion::fixed_exact(o.n, o.max_iter);
    } else if (o.criterion == "sd") {
      for (const char* k : {"n", "consecutive", "theta1", "theta2", "alpha"}) reject(k);
      c = StopCriterion::standard_deviation(o.sd, o.max_iter);
    } else if (o.criterion == "dual") {
      for (const char* k : {"n", "consecutive", "sd"}) reject(k);
      c = StopCriterion::dual_threshold(o.theta1, o.theta2, o.alpha, o.max_iter);
    } else {
      throw ConfigError{"invalid_argument", "unknown criterion: " + o.criterion};
    }
    if (o.method != "emd") NoisePlan{0, o.nr, o.nstd}.validate();
    if (o.max_modes < 1) throw ConfigError{"invalid_argument", "max-modes must be >= 1"};
    return {c, seed.value_or(0)};
  } catch (const Error& e) {
    throw ConfigError{std::string(to_string(e.kind())), e.what()};
  }
}

int cmd_decompose(const CLI::App* app, DecomposeOptions& o, std::ostream& out) {
  if (!fs::exists(o.input)) throw ConfigError{"input_not_found", "input not found: " + o.input};
  const auto [criterion, seed] = resolve_decompose(app, o);

  std::vector<Signal> signals;
  try {
    signals = load_csv(o.input);
  } catch (const Error& e) {
    throw ConfigError{std::string(to_string(e.kind())), e.what()};
  }
  const fs::path dir = o.output;
  ensure_output_dir(dir);

  const Method method = parse_method(o.method);
  json reports = json::array();
  bool failed = false;
  for (std::size_t k = 0; k < signals.size(); ++k) {
    const Signal& s = signals[k];
    json entry{{"index", k}};
    try {
      Decomposition d;
      if (method == Method::emd) {
        d = emd(s, criterion, o.max_modes);
      } else {
        EnsembleConfig cfg;
        cfg.noise = {seed, o.nr, o.nstd};
        cfg.criterion = criterion;
        cfg.max_modes = o.max_modes;
        cfg.threads = o.threads;
        d = method == Method::eemd ? eemd(s, cfg) : ceemdan(s, cfg);
      }
      std::vector<std::vector<double>> columns = d.imfs;
      columns.push_back(d.residue);
      write_file_atomic(dir / ("imfs_" + std::to_string(k) + ".csv"),
                        format_csv(columns, s.sample_rate()));
      if (o.plot) {
        write_file_atomic(dir / ("modes_" + std::to_string(k) + ".svg"),
                          render_modes_svg(s.samples(), d,
                                           o.method + " signal " + std::to_string(k)));
      }
      entry["status"] = "ok";
      entry["report"] = report_to_json(make_report(d, s));
      out << "signal " << k << ": " << d.imf_count() << " IMFs, " << d.total_iterations
          << " iterations, " << std::setprecision(3) << d.elapsed_seconds << " s\n";
    } catch (const Error& e) {
      failed = true;
      entry["status"] = std::string(to_string(e.kind()));
      entry["message"] = e.what();
    }
    reports.push_back(entry);
  }

  json doc{
      {"method", o.method},
      {"criterion", criterion_to_json(criterion)},
      {"max_modes", o.max_modes},
      {"signals", reports},
  };
  if (method != Method::emd) {
    doc["nstd"] = o.nstd;
    doc["nr"] = o.nr;
    doc["seed"] = seed;
  }
  write_file_atomic(dir / "report.json", doc.dump(2) + "\n");
  return failed ? kExitPartialFailure : kExitOk;
}

std::string point_label(const SweepRow& r) {
  std::ostringstream s;
  s << r.criterion;
  if (r.method != Method::emd) s << " nstd=" << r.nstd << " nr=" << r.nr;
  s << " it=" << r.max_iter;
  return s.str();
}

int cmd_sweep(const CLI::App* app, SweepOptions& o, std::ostream& out) {
  if (!fs::exists(o.spec)) throw ConfigError{"input_not_found", "input not found: " + o.spec};
  SweepSpec spec;
  try {
    spec = parse_sweep_spec(read_text(o.spec), fs::path(o.spec).parent_path());
    if (given(app, "--seed")) {
      spec.master_seed = o.seed;
    } else if (!json::parse(read_text(o.spec)).contains("master_seed")) {
      if (auto s = env_seed()) spec.master_seed = *s;
    }
    if (given(app, "--threads")) spec.threads = o.threads;
    spec.validate();
  } catch (const Error& e) {
    throw ConfigError{std::string(to_string(e.kind())), e.what()};
  }
  const fs::path dir = o.output;
  ensure_output_dir(dir);

  const std::vector<SweepRow> rows = run_sweep(spec);
  write_file_atomic(dir / "sweep.csv", sweep_to_csv(rows));
  write_file_atomic(dir / "sweep.json", sweep_to_json(rows));

  std::vector<std::string> labels;
  std::vector<double> ecms;
  bool failed = false;
  for (const auto& r : rows) {
    if (!r.aggregate) {
      failed = failed || r.succeeded == 0;
      continue;
    }
    labels.push_back(point_label(r));
    ecms.push_back(r.ecm);
    out << point_label(r) << ": imf=" << r.imf_count << " iterations=" << r.iterations
        << " ecm=" << r.ecm << " (" << r.succeeded << "/" << spec.signals.size() << " ok)\n";
  }
  if (o.plot) {
    write_file_atomic(dir / "sweep.svg",
                      render_series_svg(labels, ecms, std::string(to_string(spec.method)) +
                                                          " reconstruction error", "ECM"));
  }
  return failed ? kExitPartialFailure : kExitOk;
}

int cmd_report(ReportOptions& o, std::ostream& out) {
  if (!fs::exists(o.input)) throw ConfigError{"input_not_found", "input not found: " + o.input};
  json doc;
  try {
    doc = json::parse(read_text(o.input));
  } catch (const json::parse_error& e) {
    throw ConfigError{"parse_error", e.what()};
  }

  try {
    if (doc.contains("rows")) {
      std::vector<std::string> labels;
      std::vector<double> ecms;
      out << std::left << std::setw(44) << "parameters" << std::right << std::setw(8) << "IMF"
          << std::setw(12) << "Time(s)" << std::setw(14) << "Iterations" << std::setw(14) << "ECM"
          << std::setw(10) << "IO" << "\n";
      for (const auto& r : doc.at("rows")) {
        if (!r.value("aggregate", false)) continue;
        std::ostringstream label;
        label << r.at("method").get<std::string>() << " " << r.at("criterion").get<std::string>();
        if (r.at("method") != "emd") {
          label << " nstd=" << r.at("nstd").get<double>() << " nr=" << r.at("nr").get<int>();
        }
        label << " it=" << r.at("max_iter").get<int>();
        labels.push_back(label.str());
        ecms.push_back(r.at("ecm").get<double>());
        out << std::left << std::setw(44) << label.str() << std::right << std::fixed
            << std::setprecision(2) << std::setw(8) << r.at("imf_count").get<double>()
            << std::setw(12) << r.at("time_s").get<double>() << std::setprecision(0)
            << std::setw(14) << r.at("iterations").get<double>() << std::scientific
            << std::setprecision(3) << std::setw(14) << r.at("ecm").get<double>();
        if (r.at("io").is_null()) {
          out << std::setw(10) << "-";
        } else {
          out << std::fixed << std::setprecision(4) << std::setw(10) << r.at("io").get<double>();
        }
        out << std::defaultfloat << "\n";
      }
      if (!o.plot.empty()) {
        write_file_atomic(o.plot, render_series_svg(labels, ecms, "reconstruction error", "ECM"));
      }
    } else if (doc.contains("signals")) {
      out << "method " << doc.at("method").get<std::string>() << "\n";
      out << std::setw(8) << "signal" << std::setw(8) << "IMF" << std::setw(12) << "Time(s)"
          << std::setw(14) << "Iterations" << std::setw(14) << "ECM" << "\n";
      for (const auto& s : doc.at("signals")) {
        out << std::setw(8) << s.at("index").get<int>();
        if (s.at("status") != "ok") {
          out << "  " << s.at("status").get<std::string>() << "\n";
          continue;
        }
        const json& r = s.at("report");
        out << std::setw(8) << r.at("imf_count").get<int>() << std::fixed << std::setprecision(3)
            << std::setw(12) << r.at("elapsed_seconds").get<double>() << std::setw(14)
            << r.at("total_iterations").get<long long>() << std::scientific << std::setprecision(3)
            << std::setw(14) << r.at("ecm").get<double>() << std::defaultfloat << "\n";
      }
    } else {
      throw ConfigError{"parse_error", "not a sweep or decomposition report"};
    }
  } catch (const json::exception& e) {
    throw ConfigError{"parse_error", e.what()};
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"modekit: empirical mode decomposition toolkit"};
  app.require_subcommand(1);

  DecomposeOptions dec;
  auto* decompose = app.add_subcommand("decompose", "Decompose every column of a signal CSV");
  decompose->add_option("input", dec.input, "Input CSV")->required();
  decompose->add_option("output", dec.output, "Output directory")->required();
  decompose->add_option("--config", dec.config, "JSON file with default option values");
  decompose->add_option("--method", dec.method, "emd | eemd | ceemdan")->capture_default_str();
  decompose->add_option("--criterion", dec.criterion, "fixed-check | fixed | sd | dual")
      ->capture_default_str();
  decompose->add_option("--n", dec.n, "Sifting count for fixed-check / fixed");
  decompose->add_option("--consecutive", dec.consecutive, "Consecutive IMF checks (fixed-check)");
  decompose->add_option("--sd", dec.sd, "SD threshold");
  decompose->add_option("--theta1", dec.theta1, "Dual threshold theta1");
  decompose->add_option("--theta2", dec.theta2, "Dual threshold theta2");
  decompose->add_option("--alpha", dec.alpha, "Dual threshold alpha");
  decompose->add_option("--max-iter", dec.max_iter, "Sifting iteration cap")->capture_default_str();
  decompose->add_option("--nstd", dec.nstd, "Noise std relative to the signal std")
      ->capture_default_str();
  decompose->add_option("--nr", dec.nr, "Number of noise realizations")->capture_default_str();
  decompose->add_option("--seed", dec.seed, "Master seed (fallback: MODEKIT_SEED)");
  decompose->add_option("--max-modes", dec.max_modes, "Cap on the number of IMFs");
  decompose->add_option("--threads", dec.threads, "Worker threads, 0 = all");
  decompose->add_flag("--plot", dec.plot, "Write one SVG of stacked modes per signal");

  SweepOptions sw;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a JSON spec");
  sweep->add_option("spec", sw.spec, "Sweep spec JSON")->required();
  sweep->add_option("output", sw.output, "Output directory")->required();
  sweep->add_option("--threads", sw.threads, "Worker threads, 0 = all");
  sweep->add_option("--seed", sw.seed, "Master seed override");
  sweep->add_flag("--plot", sw.plot, "Write an SVG of ECM per grid point");

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Print a table from sweep.json or report.json");
  report->add_option("input", rep.input, "sweep.json or report.json")->required();
  report->add_option("--plot", rep.plot, "Write an ECM SVG to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return kExitConfigError;
  }

  try {
    if (decompose->parsed()) return cmd_decompose(decompose, dec, out);
    if (sweep->parsed()) return cmd_sweep(sweep, sw, out);
    return cmd_report(rep, out);
  } catch (const ConfigError& e) {
    print_error(err, e.tag, e.message);
    return kExitConfigError;
  } catch (const Error& e) {
    print_error(err, std::string(to_string(e.kind())), e.what());
    return kExitPartialFailure;
  }
}

}  // namespace modekit
