#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "naeth/cache.hpp"
#include "naeth/config.hpp"
#include "naeth/csv.hpp"
#include "naeth/errors.hpp"
#include "naeth/experiments.hpp"

using namespace naeth;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("naeth_test_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const std::string& extra) {
  return parse_config(R"({"sizes": [6, 8], )" + extra + "}");
}

}  // namespace

TEST_CASE("config parsing") {
  const auto d = parse_config("{}");
  CHECK(d.sizes == std::vector<int>{8, 10, 12});
  CHECK(d.model.preset == "default");
  CHECK(d.op.kind == TensorKind::quadrupole);

  const auto c = parse_config(R"({
    // comments are allowed
    "sizes": [6, 8],
    "operator": {"kind": "dipole", "sites": [2], "q": 1},
    "stats": {"energy_bin": 0.25, "min_count": 3},
    "seed": 7
  })");
  CHECK(c.sizes == std::vector<int>{6, 8});
  CHECK(c.op.kind == TensorKind::dipole);
  CHECK(c.op.q == 1);
  CHECK(c.stats.bins.energy == 0.25);
  CHECK(c.stats.bins.min_count == 3);
  CHECK(c.rng_seed == 7);
  CHECK(c.operator_for(8).rank == 1);

  const auto custom = parse_config(R"({"model": {"preset": "custom", "nn_couplings": [1.0, 0.5]}})");
  CHECK(custom.sizes == std::vector<int>{3});

  CHECK_THROWS_AS(parse_config(R"({"sizez": [8]})"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(R"({"operator": {"kind": "dipole", "rank": 1}})"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(R"({"sizes": [10, 8]})"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(R"({"sizes": [8, 16]})"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(R"({"operator": {"kind": "octupole"}})"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(R"({"operator": {"kind": "dipole", "q": 2}})"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("{not json"), InvalidArgument);
  CHECK_THROWS_AS(load_config("/nonexistent/naeth.conf"), InvalidArgument);
}

TEST_CASE("spectrum cache round trip") {
  const fs::path dir = scratch("cache");
  auto cfg = small_config(R"("operator": {"kind": "quadrupole"})");
  cfg.cache_dir = dir;
  const SizedSystem fresh = prepare_system(cfg, 8);
  CHECK_FALSE(fresh.from_cache);
  const fs::path file = cache_path(dir, 8, fresh.table.model_spec_hash());
  REQUIRE(fs::exists(file));
  CHECK(file.filename().string().rfind("spectrum_N8_", 0) == 0);

  const SizedSystem cached = prepare_system(cfg, 8);
  CHECK(cached.from_cache);
  CHECK(table_digest(cached.table) == table_digest(fresh.table));

  const auto t = cfg.operator_for(8);
  const auto a = diagonal_reduced_elements(t, fresh.table);
  const auto b = diagonal_reduced_elements(t, cached.table);
  const auto p = solve_nats(fresh.table, -0.5, 0.0);
  CHECK(thermal_average(a, 0, fresh.table, p) == thermal_average(b, 0, cached.table, p));

  CHECK_FALSE(try_load_spectrum(file, 8, fresh.table.model_spec_hash() ^ 1).has_value());
  CHECK_FALSE(try_load_spectrum(dir / "missing.bin", 8, 0).has_value());

  std::string bytes = slurp(file);
  bytes[0] = 'X';
  const fs::path bad = dir / "bad.bin";
  std::ofstream(bad, std::ios::binary) << bytes;
  CHECK_THROWS_AS(load_spectrum(bad), InvalidArgument);
  std::ofstream(bad, std::ios::binary | std::ios::trunc) << slurp(file).substr(0, 40);
  CHECK_THROWS_AS(load_spectrum(bad), InvalidArgument);

  // A damaged cache entry is recomputed and rewritten.
  std::ofstream(file, std::ios::binary | std::ios::trunc) << bytes;
  const SizedSystem again = prepare_system(cfg, 8);
  CHECK_FALSE(again.from_cache);
  CHECK(table_digest(load_spectrum(file)) == table_digest(fresh.table));
  fs::remove_all(dir);
}

TEST_CASE("csv format") {
  const fs::path dir = scratch("csv");
  {
    CsvWriter w(dir / "x.csv", {"a", "b", "c"});
    w.row({std::string("s"), 3LL, 0.1});
    CHECK_THROWS_AS(w.row({1LL}), std::logic_error);
  }
  CHECK(slurp(dir / "x.csv") == "a,b,c\ns,3,0.10000000000000001\n");
  for (double x : {0.1, -1.0 / 3.0, 1e-300, 6.02e23}) CHECK(std::stod(format_double(x)) == x);
  fs::remove_all(dir);
}

TEST_CASE("log-log slope fit") {
  const std::vector<int> sizes{8, 10, 12, 14};
  std::vector<double> dev;
  for (int n : sizes) dev.push_back(-3.0 * std::pow(n, -0.5));
  const auto s = fit_log_log(sizes, dev);
  REQUIRE(s.fit.has_value());
  CHECK(s.fit->slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::exp(s.fit->intercept) == doctest::Approx(3.0).epsilon(1e-12));
  dev[1] = 0.0;
  const auto z = fit_log_log(sizes, dev);
  CHECK(z.excluded_zero == 1);
  CHECK(z.fit->n == 3);
  CHECK_FALSE(fit_log_log({8, 10}, {0.0, 1e-20}).fit.has_value());
}

TEST_CASE("identity operator thermalizes exactly") {
  auto cfg = small_config(R"("operator": {"kind": "identity"},
    "state": {"kind": "product", "energy_density": -0.1, "magnetization_density": 0.1})");
  const auto r = run_thermalization_sweep(cfg);
  REQUIRE(r.records.size() == 2);
  for (const auto& x : r.records) {
    CHECK(x.time_avg == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x.thermal_avg == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(x.deviation) <= 1e-12);
  }
  CHECK_FALSE(r.slope.fit.has_value());
}

TEST_CASE("sweep agrees with its verification pass") {
  auto cfg = small_config(R"("operator": {"kind": "quadrupole"},
    "state": {"kind": "product", "energy_density": -0.1, "magnetization_density": 0.1})");
  const auto r = run_thermalization_sweep(cfg);
  REQUIRE(r.records.size() == 2);
  CHECK(verify_scaling_result(cfg, r) <= 1e-10);
  for (const auto& x : r.records) CHECK(std::abs(x.time_avg_imag) <= 1e-12);
}

TEST_CASE("off-diagonal thermal components vanish") {
  auto cfg = small_config(R"("operator": {"kind": "quadrupole"},
    "ensemble": {"energy_density": -0.1, "magnetization_density": 0.1})");
  const auto r = run_thermal_report(cfg);
  CHECK(r.size() == 10);
  for (const auto& x : r) {
    REQUIRE(x.direct.has_value());
    if (x.q != 0) {
      CHECK(x.value == 0.0);
      CHECK(std::abs(*x.direct) <= 1e-12);
    } else {
      CHECK(std::abs(x.value - *x.direct) <= 1e-10);
    }
  }
}

TEST_CASE("anomaly records factorize") {
  for (const char* state : {R"("anomalous_A")", R"("anomalous_B")"}) {
    auto cfg = parse_config(std::string(R"({"sizes": [8, 10], "operator": {"kind": "quadrupole", "q": )") +
                            (std::string(state) == R"("anomalous_B")" ? "1" : "0") +
                            R"(}, "state": {"kind": )" + state + "}}");
    const auto r = run_anomaly_experiment(cfg);
    REQUIRE(r.records.size() == 2);
    for (const auto& x : r.records) {
      CHECK(std::abs(x.time_avg - x.factorized) <= 1e-12);
      CHECK(std::abs(x.thermal_avg) <= 1e-10);
      CHECK(x.deviation == doctest::Approx(x.time_avg - x.thermal_avg));
    }
  }
}

TEST_CASE("laplace report on the identity") {
  auto cfg = small_config(R"("operator": {"kind": "identity"})");
  cfg.sizes = {8, 10};
  const auto r = run_laplace_report(cfg);
  REQUIRE(r.records.size() == 2);
  for (const auto& x : r.records) {
    CHECK(x.exact == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x.intercept == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(x.spin_slope) <= 1e-10);
    CHECK(std::abs(x.gap) <= 1e-10);
  }
  auto dipole = small_config(R"("operator": {"kind": "dipole"})");
  CHECK_THROWS_AS(run_laplace_report(dipole), InvalidArgument);
}

TEST_CASE("reports are byte-for-byte deterministic") {
  auto cfg = small_config(R"("operator": {"kind": "quadrupole"},
    "state": {"kind": "product", "energy_density": -0.1, "magnetization_density": 0.1,
              "brickwork_depth": 2})");
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  write_scaling_csv(run_thermalization_sweep(cfg), a);
  write_scaling_csv(run_thermalization_sweep(cfg), b);
  for (const char* f : {"sweep.csv", "sweep_fit.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  cfg.stats.offdiagonal_max_sites = 8;
  run_eth_stats(cfg, &a);
  run_eth_stats(cfg, &b);
  CHECK(slurp(a / "eth_summary.csv") == slurp(b / "eth_summary.csv"));
  CHECK(slurp(a / "eth_diagonal_N8.csv") == slurp(b / "eth_diagonal_N8.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("mid-spectrum spread of the quadrupole shrinks with N") {
  auto cfg = parse_config(R"({"sizes": [8, 10, 12], "operator": {"kind": "quadrupole"},
    "stats": {"offdiagonal": false}})");
  const auto r = run_eth_stats(cfg, nullptr);
  REQUIRE(r.sizes.size() == 3);
  for (const auto& s : r.sizes) REQUIRE(s.mid_stddev.has_value());
  CHECK(*r.sizes[1].mid_stddev < *r.sizes[0].mid_stddev);
  CHECK(*r.sizes[2].mid_stddev < *r.sizes[1].mid_stddev);
}
