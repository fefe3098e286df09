#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "modekit/error.hpp"
#include "modekit/experiments.hpp"
#include "modekit/signal.hpp"
#include "oracles.hpp"

using namespace modekit;
namespace fs = std::filesystem;

namespace {

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::invalid_argument;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("modekit_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

GridBlock block(std::vector<StopCriterion> c, std::vector<double> nstd = {},
                std::vector<int> nr = {}) {
  GridBlock b;
  b.criteria = std::move(c);
  b.nstd = std::move(nstd);
  b.nr = std::move(nr);
  return b;
}

std::string strip_time(const std::string& csv) {
  // time_s is the 9th column; the criterion column is quoted and holds commas.
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') quoted = !quoted;
      if (ch == ',' && !quoted) {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    fields.push_back(cur);
    fields.erase(fields.begin() + 8);
    for (auto& f : fields) out += f + ",";
    out += "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("gen_two_tone") {
  auto s = gen_two_tone(5, 40, 400, 5);
  REQUIRE(s.size() == 2000);
  CHECK(s.samples()[0] == 0.0);
  CHECK(oracle::max_abs(to_vec(s.samples())) <= 2.0);
  CHECK(s.sample_rate() == 400);

  auto mag = oracle::dft_magnitude(to_vec(s.samples()));
  std::vector<std::size_t> order(mag.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + 2, order.end(),
                    [&](auto a, auto b) { return mag[a] > mag[b]; });
  const double df = 400.0 / 2000.0;
  std::vector<double> top{order[0] * df, order[1] * df};
  std::sort(top.begin(), top.end());
  CHECK(top[0] == doctest::Approx(5.0));
  CHECK(top[1] == doctest::Approx(40.0));

  CHECK(kind_of([] { gen_two_tone(5, 200, 400, 1); }) == ErrorKind::aliasing_violation);
  CHECK(kind_of([] { gen_two_tone(40, 5, 400, 1); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { gen_two_tone(5, 40, 400, 0); }) == ErrorKind::invalid_argument);
}

TEST_CASE("gen_amfm") {
  auto pure = gen_amfm(30, 0, 0, 640, 1);
  const auto ref = oracle::sine(30, 640, pure.size());
  for (std::size_t i = 0; i < pure.size(); ++i) CHECK(std::abs(pure.samples()[i] - ref[i]) < 1e-12);

  const double am = 1.5, depth = 2.0, fc = 30, fs = 640, dur = 3.2;
  auto s = gen_amfm(fc, am, depth, fs, dur);
  const auto x = to_vec(s.samples());
  auto up = oracle::mirrored_envelope(oracle::extrema(x).first, x.size());
  for (std::size_t i = x.size() / 10; i < x.size() - x.size() / 10; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double want = 1 + 0.5 * std::sin(2 * std::numbers::pi * am * t);
    CHECK(std::abs(up[i] - want) <= 0.1 * want);
  }

  const double zc = static_cast<double>(oracle::zero_crossings(x));
  CHECK(std::abs(zc - 2 * fc * dur) <= 2 * depth + 2);

  CHECK(kind_of([] { gen_amfm(300, 1, 30, 640, 1); }) == ErrorKind::aliasing_violation);
}

TEST_CASE("gen_white_noise") {
  auto a = gen_white_noise(1000, 100, 5);
  auto b = gen_white_noise(1000, 100, 5);
  REQUIRE(a.size() == 100000);
  CHECK(to_vec(a.samples()) == to_vec(b.samples()));
  const auto x = to_vec(a.samples());
  CHECK(std::abs(oracle::stddev(x) - 1.0) < 0.02);
  for (std::size_t lag = 1; lag <= 5; ++lag) {
    std::vector<double> head(x.begin(), x.end() - lag), tail(x.begin() + lag, x.end());
    CHECK(std::abs(oracle::pearson(head, tail, 0, head.size())) < 0.02);
  }
  CHECK(to_vec(gen_white_noise(100, 1, 6).samples()) != to_vec(gen_white_noise(100, 1, 5).samples()));
}

TEST_CASE("default corpus") {
  auto c = default_corpus();
  REQUIRE(c.size() == 10);
  CHECK(c[0].id == "two_tone_5_40");
  CHECK(c[0].signal.sample_rate() == 400);
  for (auto& s : c) CHECK(s.signal.size() == kCorpusLength);
  auto again = default_corpus();
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(to_vec(c[i].signal.samples()) == to_vec(again[i].signal.samples()));
  }
}

TEST_CASE("csv parsing") {
  auto one = parse_csv("sample_rate=400\n1\n2\n3\n4\n5\n6\n7\n8\n");
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 8);
  CHECK(one[0].sample_rate() == 400);

  auto two = parse_csv("sample_rate=650.5\r\n1,-1\r\n2,-2.5e-3\r\n");
  REQUIRE(two.size() == 2);
  CHECK(two[1].samples()[1] == -2.5e-3);
  CHECK(two[0].sample_rate() == 650.5);

  CHECK(kind_of([] { parse_csv("sample_rate=400\n1\nNaN\n"); }) == ErrorKind::parse_error);
  CHECK(message_of([] { parse_csv("sample_rate=400\n1\nNaN\n"); }).find("line 3") !=
        std::string::npos);
  CHECK(kind_of([] { parse_csv("sample_rate=400\n1\ninf\n"); }) == ErrorKind::parse_error);
  CHECK(kind_of([] { parse_csv("1\n2\n"); }) == ErrorKind::parse_error);
  CHECK(kind_of([] { parse_csv("sample_rate=0\n1\n"); }) == ErrorKind::parse_error);
  CHECK(kind_of([] { parse_csv("sample_rate=400\n1,2\n3\n"); }) == ErrorKind::parse_error);
  CHECK(kind_of([] { parse_csv("sample_rate=400\n1\nabc\n"); }) == ErrorKind::parse_error);
  CHECK(kind_of([] { parse_csv(""); }) == ErrorKind::empty_file);
  CHECK(kind_of([] { parse_csv("sample_rate=400\n"); }) == ErrorKind::empty_file);
  CHECK(kind_of([] { load_csv("/nonexistent/modekit.csv"); }) == ErrorKind::io_error);
}

TEST_CASE("csv round trip is bit exact") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  std::vector<double> a(500), b(500);
  for (auto& v : a) v = g(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
  for (auto& v : b) v = g(rng);
  a[0] = 0.1;
  a[1] = 5e-324;
  a[2] = -1.7976931348623157e308;
  std::vector<Signal> sigs{Signal(a, 123.456), Signal(b, 123.456)};
  auto dir = temp_dir("csv");
  save_csv(dir / "x.csv", sigs);
  auto back = load_csv(dir / "x.csv");
  REQUIRE(back.size() == 2);
  CHECK(to_vec(back[0].samples()) == a);
  CHECK(to_vec(back[1].samples()) == b);
  CHECK(back[0].sample_rate() == 123.456);
  for (auto& e : fs::directory_iterator(dir)) CHECK(e.path().filename() == "x.csv");
  fs::remove_all(dir);

  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
}

TEST_CASE("sweep spec validation and expansion") {
  SweepSpec spec;
  spec.method = Method::emd;
  spec.signals = {{"a", gen_two_tone(5, 40, 400, 1)}};
  CHECK(message_of([&] { spec.validate(); }) == "empty sweep grid");

  spec.grids = {block({StopCriterion{}}, {}, {100, 200})};
  CHECK(message_of([&] { spec.validate(); }) == "nr is not applicable to emd");
  spec.grids = {block({StopCriterion{}})};
  CHECK_NOTHROW(spec.validate());
  auto pts = spec.expand();
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].nr == 0);

  spec.method = Method::eemd;
  pts = spec.expand();
  CHECK(pts[0].nstd == 0.2);
  CHECK(pts[0].nr == 500);

  spec.signals.clear();
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("two-block NR and nstd grid parses to six points") {
  const std::string text = R"({
    "method": "eemd",
    "grids": [
      {"criteria": [{"kind": "dual", "max_iter": 10}], "nstd": [0.02], "nr": [500, 2000, 10000]},
      {"criteria": [{"kind": "dual", "max_iter": 10}], "nstd": [0.05, 0.1, 0.5], "nr": [1000]}
    ],
    "signals": "corpus",
    "master_seed": 42
  })";
  auto spec = parse_sweep_spec(text);
  CHECK(spec.expand().size() == 6);
  CHECK(spec.signals.size() == 10);
  CHECK(spec.master_seed == 42);

  CHECK(message_of([] { parse_sweep_spec(R"({"method":"emd","criteria":[]})"); }) ==
        "empty sweep grid");
  CHECK(message_of([] { parse_sweep_spec(R"({"method":"eemd","nr":[]})"); }) ==
        "empty sweep grid");
  CHECK(kind_of([] { parse_sweep_spec("{not json"); }) == ErrorKind::parse_error);
  CHECK(kind_of([] { parse_sweep_spec(R"({"signals":["nope"]})"); }) ==
        ErrorKind::invalid_argument);
  CHECK(kind_of([] { parse_sweep_spec(R"({"criteria":[{"kind":"magic"}]})"); }) !=
        ErrorKind::io_error);
}

TEST_CASE("sweep rows, aggregates and failures") {
  SweepSpec spec;
  spec.method = Method::emd;
  spec.grids = {block({StopCriterion::fixed_exact(10), StopCriterion::dual_threshold()})};
  auto corpus = default_corpus();
  spec.signals = {corpus[0], corpus[2], {"short", Signal({1, 2, 1}, 10)}};
  spec.master_seed = 3;

  auto rows = run_sweep(spec);
  REQUIRE(rows.size() == 2 * 3 + 2);
  CHECK(rows[2].status == "signal_too_short");
  CHECK(rows[2].succeeded == 0);
  const auto& agg = rows[3];
  CHECK(agg.aggregate);
  CHECK(agg.signal_id == "mean");
  CHECK(agg.status == "aggregate");
  CHECK(agg.succeeded == 2);
  CHECK(agg.imf_count == doctest::Approx((rows[0].imf_count + rows[1].imf_count) / 2));
  CHECK(std::isfinite(agg.ecm));
  CHECK(rows[0].status == "ok");
  CHECK(rows[0].ecm < 1e-15);

  auto csv = sweep_to_csv(rows);
  CHECK(csv.rfind("method,criterion,nstd,nr,max_iter,signal_id,imf_count,iterations,time_s,ecm,io,"
                  "status,succeeded\n", 0) == 0);
  CHECK(sweep_to_json(rows).find("\"rows\"") != std::string::npos);
}

TEST_CASE("sweeps are deterministic and seed-isolated") {
  SweepSpec spec;
  spec.method = Method::ceemdan;
  spec.grids = {block({StopCriterion::dual_threshold(0.05, 0.5, 0.05, 50)}, {0.2}, {4})};
  auto corpus = default_corpus();
  spec.signals = {corpus[0], corpus[5]};
  spec.master_seed = 99;

  auto a = sweep_to_csv(run_sweep(spec));
  spec.threads = 4;
  auto b = sweep_to_csv(run_sweep(spec));
  CHECK(strip_time(a) == strip_time(b));

  auto rows = run_sweep(spec);
  for (auto& r : rows) {
    if (!r.aggregate) CHECK(r.ecm < 1e-15);
  }

  spec.grids.push_back(block({StopCriterion::standard_deviation()}, {0.1}, {4}));
  auto extended = run_sweep(spec);
  REQUIRE(extended.size() == 6);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(extended[i].ecm == rows[i].ecm);
    CHECK(extended[i].imf_count == rows[i].imf_count);
    CHECK(extended[i].iterations == rows[i].iterations);
  }
  CHECK(job_seed(1, 0, 0) != job_seed(1, 0, 1));
  CHECK(job_seed(1, 0, 0) != job_seed(1, 1, 0));
}

TEST_CASE("atomic writes leave no temporaries") {
  auto dir = temp_dir("atomic");
  write_file_atomic(dir / "a.txt", "one");
  write_file_atomic(dir / "a.txt", "two");
  std::ifstream in(dir / "a.txt");
  std::string s;
  in >> s;
  CHECK(s == "two");
  std::size_t n = 0;
  for ([[maybe_unused]] auto& e : fs::directory_iterator(dir)) ++n;
  CHECK(n == 1);
  CHECK_THROWS_AS(write_file_atomic("/nonexistent/dir/x.txt", "a"), Error);
  fs::remove_all(dir);
}
