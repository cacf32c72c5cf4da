#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "naeth/cache.hpp"
#include "naeth/clebsch_gordan.hpp"
#include "naeth/csv.hpp"
#include "naeth/errors.hpp"
#include "naeth/experiments.hpp"

using namespace naeth;

namespace {

struct GlobalOptions {
  std::string config;
  std::string cache_dir;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

ExperimentConfig resolve_config(const GlobalOptions& g) {
  ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
  if (!g.cache_dir.empty()) cfg.cache_dir = g.cache_dir;
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  if (g.seed) cfg.rng_seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  cfg.validate();
  return cfg;
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

void print_fit(const char* what, const SlopeFit& s) {
  if (s.fit)
    std::cout << fmt::format("{} slope {:.6g} +- {:.3g} ({} sizes, {} zero deviations excluded)\n", what,
                             s.fit->slope, s.fit->slope_stderr, s.fit->n, s.excluded_zero);
  else
    std::cout << fmt::format("{} slope unavailable ({} zero deviations excluded)\n", what, s.excluded_zero);
}

int cmd_spectrum(const ExperimentConfig& cfg) {
  for (int n : cfg.sizes) {
    const SizedSystem sys = prepare_system(cfg, n);
    const auto& table = sys.table;
    CsvWriter w(cfg.output_dir / fmt::format("spectrum_N{}.csv", n), {"alpha", "E", "s", "degenerate_same_spin"});
    for (const auto& mu : table.multiplets())
      w.row({static_cast<long long>(mu.label), mu.energy, mu.spin.value(),
             static_cast<long long>(mu.degenerate_same_spin)});
    std::cout << fmt::format("N={} multiplets={} digest={:016x}{}\n", n, table.size(), table_digest(table),
                             sys.from_cache ? " (cache)" : "");
    if (!cfg.cache_dir.empty()) {
      const auto path = cache_path(cfg.cache_dir, n, table.model_spec_hash());
      const auto reloaded = load_spectrum(path);
      std::cout << fmt::format("cache {} reload digest={:016x}\n", path.string(), table_digest(reloaded));
    }
  }
  return 0;
}

int cmd_cg(const std::string& s, const std::string& m, const std::string& sp, const std::string& mp,
           const std::string& k, const std::string& q) {
  const CGKey key{HalfInteger::parse(s), HalfInteger::parse(m), HalfInteger::parse(sp),
                  HalfInteger::parse(mp), HalfInteger::parse(k), HalfInteger::parse(q)};
  key.validate();
  const ExactScalar c = cg_exact(key);
  std::cout << "exact " << c.to_string() << '\n';
  std::cout << "value " << format_double(c.to_double()) << '\n';
  const bool asymptotic_form = key.s == key.s_prime && key.m == key.m_prime + key.q && key.k.is_integer() &&
                               key.s.twice() >= 2 && key.k <= key.s;
  if (asymptotic_form) {
    const auto a = cg_asymptotic(key.s, key.m_prime, key.k, key.q);
    std::cout << "asymptotic " << format_double(a.value) << " (relative error estimate "
              << format_double(a.relative_error_estimate) << (a.regime_warning ? ", outside s-m << s" : "")
              << ")\n";
  }
  return 0;
}

int cmd_eth_stats(const ExperimentConfig& cfg) {
  const auto r = run_eth_stats(cfg, &cfg.output_dir, log_line);
  for (const auto& s : r.sizes)
    std::cout << fmt::format("N={} mid-spectrum stddev {} max spread {:.3g}{}\n", s.n,
                             s.mid_stddev ? fmt::format("{:.6g}", *s.mid_stddev) : "undefined", s.max_spread,
                             s.offdiagonal ? fmt::format(" offdiag residual variance {:.4g}",
                                                         s.offdiagonal->residual_variance)
                                           : "");
  if (r.spin_slope)
    std::cout << fmt::format("spin-density slope {:.6g} [{:.6g}, {:.6g}] intercept {:.6g} [{:.6g}, {:.6g}]\n",
                             r.spin_slope->fit.slope, r.spin_slope->slope_ci_low, r.spin_slope->slope_ci_high,
                             r.spin_slope->fit.intercept, r.spin_slope->intercept_ci_low,
                             r.spin_slope->intercept_ci_high);
  else
    std::cout << "spin-density slope: " << r.spin_slope_note << '\n';
  return 0;
}

int cmd_thermal(const ExperimentConfig& cfg, bool laplace) {
  if (laplace) {
    const auto r = run_laplace_report(cfg, log_line);
    write_laplace_csv(r, cfg.output_dir);
    for (const auto& x : r.records)
      std::cout << fmt::format("N={} exact {:.10g} laplace {:.10g} gap {:.3g}\n", x.n, x.exact, x.laplace, x.gap);
    return 0;
  }
  const auto r = run_thermal_report(cfg, log_line);
  write_thermal_csv(r, cfg.output_dir);
  for (const auto& x : r)
    std::cout << fmt::format("N={} q={} thermal {:.12g}{}\n", x.n, x.q, x.value,
                             x.direct ? fmt::format(" (direct trace {:.12g})", *x.direct) : "");
  return 0;
}

int cmd_time_avg(const ExperimentConfig& cfg) {
  const auto r = run_time_average_report(cfg, log_line);
  write_time_average_csv(r, cfg.output_dir);
  for (const auto& x : r)
    std::cout << fmt::format("N={} q={} time average {:.12g}{:+.3g}i\n", x.n, x.q, x.value.real(),
                             x.value.imag());
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, bool verify) {
  const auto r = run_thermalization_sweep(cfg, log_line);
  write_scaling_csv(r, cfg.output_dir);
  for (const auto& x : r.records)
    std::cout << fmt::format("N={} time {:.10g} thermal {:.10g} deviation {:.4g}\n", x.n, x.time_avg,
                             x.thermal_avg, x.deviation);
  for (const auto& s : r.skipped) std::cout << fmt::format("N={} skipped: {}\n", s.n, s.reason);
  print_fit("|deviation| vs N", r.slope);
  if (verify) {
    const double worst = verify_scaling_result(cfg, r);
    std::cout << fmt::format("verification: largest deviation discrepancy {:.3g}\n", worst);
    if (worst > 1e-10) throw SolverError("verification pass disagrees with the sweep");
  }
  return 0;
}

int cmd_anomaly(const ExperimentConfig& cfg) {
  const auto r = run_anomaly_experiment(cfg, log_line);
  write_anomaly_csv(r, cfg.output_dir);
  for (const auto& x : r.records)
    std::cout << fmt::format("N={} s_A={} time {:.10g} = {:.10g} x {:.10g}, thermal {:.3g}\n", x.n,
                             x.spin.to_string(), x.time_avg, x.cg_prefactor, x.reduced_element, x.thermal_avg);
  for (const auto& s : r.skipped) std::cout << fmt::format("N={} skipped: {}\n", s.n, s.reason);
  print_fit("|deviation| vs N", r.slope);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Abelian ETH numerics: spectra, reduced elements, ensembles, scaling sweeps"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON experiment config");
  app.add_option("--cache-dir", g.cache_dir, "spectrum cache directory");
  app.add_option("--out-dir", g.out_dir, "CSV output directory");
  app.add_option("--seed", g.seed, "model / state seed");
  app.add_option("--threads", g.threads, "worker threads")->envname("NAETH_THREADS");

  auto* spectrum = app.add_subcommand("spectrum", "decompose and cache the spectrum");
  auto* cg = app.add_subcommand("cg", "print an exact Clebsch-Gordan coefficient <s,m|s',m';k,q>");
  std::string s, m, sp, mp, k, q;
  cg->add_option("--s", s)->required();
  cg->add_option("--m", m)->required();
  cg->add_option("--sp", sp)->required();
  cg->add_option("--mp", mp)->required();
  cg->add_option("--k", k)->required();
  cg->add_option("--q", q)->required();
  auto* eth = app.add_subcommand("eth-stats", "diagonal and off-diagonal ETH diagnostics");
  auto* thermal = app.add_subcommand("thermal", "thermal averages in the solved NATS");
  bool laplace = false;
  thermal->add_flag("--laplace", laplace, "rank-0 exact sum versus the Laplace estimate");
  auto* time_avg = app.add_subcommand("time-avg", "infinite-time averages for the configured state");
  auto* sweep = app.add_subcommand("sweep", "time-versus-thermal deviation across sizes");
  bool verify = false;
  sweep->add_flag("--verify", verify, "recompute every record independently");
  auto* anomaly = app.add_subcommand("anomaly", "anomalous-state experiment");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cg->parsed()) return cmd_cg(s, m, sp, mp, k, q);
    const ExperimentConfig cfg = resolve_config(g);
    if (spectrum->parsed()) return cmd_spectrum(cfg);
    if (eth->parsed()) return cmd_eth_stats(cfg);
    if (thermal->parsed()) return cmd_thermal(cfg, laplace);
    if (time_avg->parsed()) return cmd_time_avg(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg, verify);
    if (anomaly->parsed()) return cmd_anomaly(cfg);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
