#include "naeth/experiments.hpp"

#include <cmath>

#include <fmt/format.h>

#include "naeth/cache.hpp"
#include "naeth/clebsch_gordan.hpp"
#include "naeth/csv.hpp"
#include "naeth/errors.hpp"

namespace naeth {

namespace {

constexpr int kDirectOracleMaxSites = 10;
constexpr double kZeroDeviation = 1e-13;

void say(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

double mean_energy(const EnsembleDistribution& d) {
  double e = 0.0;
  for (std::size_t i = 0; i < d.p.size(); ++i) e += d.p[i] * d.energy[i];
  return e;
}

double mean_m(const EnsembleDistribution& d) {
  double m = 0.0;
  for (std::size_t i = 0; i < d.p.size(); ++i) m += d.p[i] * d.m[i];
  return m;
}

/// States built to have M = 0 exactly.
bool zero_magnetization_kind(StateKind k) {
  return k == StateKind::anomalous_A || k == StateKind::anomalous_B || k == StateKind::singlet;
}

double ensemble_energy(const ExperimentConfig& cfg, const SpectrumTable& table) {
  return cfg.ensemble.energy_density ? *cfg.ensemble.energy_density * table.n_sites()
                                     : trace_energy(table);
}

/// Smallest spin with the chain's parity inside entropy bin `is`.
double representative_spin(int is, double ds, int n_sites) {
  int t = static_cast<int>(std::ceil(2.0 * is * ds - 1e-12));
  if ((t - n_sites) % 2 != 0) ++t;
  return 0.5 * t;
}

}  // namespace

SizedSystem prepare_system(const ExperimentConfig& cfg, int n, bool use_cache) {
  const SpinModelSpec spec = cfg.model_for(n);
  OperatorMatrix h = build_hamiltonian(spec, cfg.max_sites);
  SpinOperators ops = build_spin_operators(n, cfg.max_sites);
  const std::uint64_t hash = model_spec_hash(spec);
  if (use_cache && !cfg.cache_dir.empty()) {
    const auto path = cache_path(cfg.cache_dir, n, hash);
    std::optional<SpectrumTable> t;
    try {
      t = try_load_spectrum(path, n, hash);
    } catch (const InvalidArgument&) {
      // Unreadable cache file: recompute and overwrite it.
    }
    if (t) {
      // A cached table is only trusted for a model that passes the symmetry check.
      if (!verify_symmetry(h, ops).pass) throw SolverError("model fails the SU(2) symmetry check");
      return SizedSystem{spec, std::move(h), std::move(ops), std::move(*t), true};
    }
    SpectrumTable table = decompose(h, ops, DecomposeOptions{hash, 1e-10, cfg.threads});
    save_spectrum(table, path);
    return SizedSystem{spec, std::move(h), std::move(ops), std::move(table), false};
  }
  SpectrumTable table = decompose(h, ops, DecomposeOptions{hash, 1e-10, cfg.threads});
  return SizedSystem{spec, std::move(h), std::move(ops), std::move(table), false};
}

SlopeFit fit_log_log(const std::vector<int>& sizes, const std::vector<double>& deviations) {
  SlopeFit s;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(std::abs(deviations[i]) > kZeroDeviation)) {
      ++s.excluded_zero;
      continue;
    }
    x.push_back(std::log(static_cast<double>(sizes[i])));
    y.push_back(std::log(std::abs(deviations[i])));
  }
  if (x.size() >= 2) s.fit = least_squares(x, y);
  return s;
}

ScalingResult run_thermalization_sweep(const ExperimentConfig& cfg, const LogFn& log) {
  ScalingResult out;
  for (int n : cfg.sizes) {
    const SizedSystem sys = prepare_system(cfg, n);
    say(log, fmt::format("N={}: {} multiplets{}", n, sys.table.size(), sys.from_cache ? " (cached)" : ""));
    const auto t = cfg.operator_for(n);
    const auto diag = diagonal_reduced_elements(t, sys.table, ReducedOptions{0.1, cfg.threads});
    try {
      const auto built = build_state(cfg.state_request(sys.spec), sys.table);
      const auto dist = diagonal_distribution(built.coefficients, sys.table);
      SweepRecord r;
      r.n = n;
      r.energy = mean_energy(dist);
      r.magnetization = zero_magnetization_kind(cfg.state.kind) ? 0.0 : mean_m(dist);
      const auto p = solve_nats(sys.table, r.energy, r.magnetization);
      r.beta = p.beta;
      r.mu = p.mu();
      const Complex ta = time_average(t, cfg.op.q, built.coefficients, sys.table, diag,
                                      sys.table.degeneracy_tolerance());
      r.time_avg = ta.real();
      r.time_avg_imag = ta.imag();
      r.thermal_avg = thermal_average(diag, cfg.op.q, sys.table, p);
      r.deviation = r.time_avg - r.thermal_avg;
      out.records.push_back(r);
    } catch (const InfeasibleTarget& e) {
      say(log, fmt::format("N={}: skipped: {}", n, e.what()));
      out.skipped.push_back({n, e.what()});
    }
  }
  std::vector<int> ns;
  std::vector<double> devs;
  for (const auto& r : out.records) {
    ns.push_back(r.n);
    devs.push_back(r.deviation);
  }
  out.slope = fit_log_log(ns, devs);
  return out;
}

double verify_scaling_result(const ExperimentConfig& cfg, const ScalingResult& result) {
  double worst = 0.0;
  for (const auto& rec : result.records) {
    const SizedSystem sys = prepare_system(cfg, rec.n, false);
    const auto t = cfg.operator_for(rec.n);
    const auto built = build_state(cfg.state_request(sys.spec), sys.table);
    const double time_avg =
        time_average_dephased(t.component(cfg.op.q), built.coefficients, sys.table,
                              sys.table.degeneracy_tolerance())
            .real();
    const auto p = solve_nats(sys.table, rec.energy, rec.magnetization);
    double thermal;
    if (rec.n <= kDirectOracleMaxSites)
      thermal = thermal_trace_direct(t.component(cfg.op.q), sys.h, sys.ops, p).real();
    else
      thermal = thermal_average(diagonal_reduced_elements(t, sys.table), cfg.op.q, sys.table, p);
    worst = std::max(worst, std::abs((time_avg - thermal) - rec.deviation));
  }
  return worst;
}

AnomalyResult run_anomaly_experiment(const ExperimentConfig& cfg, const LogFn& log) {
  if (!zero_magnetization_kind(cfg.state.kind))
    throw InvalidArgument("anomaly: state kind must be anomalous_A, anomalous_B or singlet");
  AnomalyResult out;
  for (int n : cfg.sizes) {
    const SizedSystem sys = prepare_system(cfg, n);
    const auto t = cfg.operator_for(n);
    const auto diag = diagonal_reduced_elements(t, sys.table, ReducedOptions{0.1, cfg.threads});
    BuiltState built;
    try {
      built = build_state(cfg.state_request(sys.spec), sys.table);
    } catch (const InvalidArgument& e) {
      say(log, fmt::format("N={}: skipped: {}", n, e.what()));
      out.skipped.push_back({n, e.what()});
      continue;
    }
    const int a = *built.label;
    const auto& mu = sys.table.multiplet(a);
    AnomalyRecord r;
    r.n = n;
    r.state = to_string(cfg.state.kind);
    r.spin = mu.spin;
    r.m_bar = built.m_bar;
    r.label = a;
    r.energy = mu.energy;
    const Complex ta = time_average(t, cfg.op.q, built.coefficients, sys.table, diag,
                                    sys.table.degeneracy_tolerance());
    r.time_avg = ta.real();
    try {
      const auto p = solve_nats(sys.table, r.energy, 0.0);
      r.beta = p.beta;
      r.thermal_avg = thermal_average(diag, cfg.op.q, sys.table, p);
    } catch (const InfeasibleTarget& e) {
      say(log, fmt::format("N={}: skipped: {}", n, e.what()));
      out.skipped.push_back({n, e.what()});
      continue;
    }
    r.deviation = r.time_avg - r.thermal_avg;
    const HalfInteger k = HalfInteger::from_int(t.rank), qq = HalfInteger::from_int(cfg.op.q);
    double pref = 0.0;
    for (int tm = -mu.spin.twice(); tm <= mu.spin.twice(); tm += 2) {
      const HalfInteger mp = HalfInteger::from_twice(tm), m = mp + qq;
      if (std::abs(m.twice()) > mu.spin.twice()) continue;
      const Complex c = std::conj(built.coefficients.at(a, m)) * built.coefficients.at(a, mp);
      if (c == 0.0) continue;
      pref += c.real() * cg_exact(CGKey{mu.spin, m, mu.spin, mp, k, qq}).to_double();
    }
    r.cg_prefactor = pref;
    r.reduced_element = diag.value[a].value_or(0.0);
    r.factorized = pref * r.reduced_element;
    say(log, fmt::format("N={}: s_A={} time={:.6g} thermal={:.3g}", n, mu.spin.to_string(), r.time_avg,
                         r.thermal_avg));
    out.records.push_back(r);
  }
  std::vector<int> ns;
  std::vector<double> devs;
  for (const auto& r : out.records) {
    ns.push_back(r.n);
    devs.push_back(r.deviation);
  }
  out.slope = fit_log_log(ns, devs);
  return out;
}

LaplaceResult run_laplace_report(const ExperimentConfig& cfg, const LogFn& log) {
  if (cfg.operator_for(cfg.sizes.front()).rank != 0)
    throw InvalidArgument("the Laplace report needs a rank-0 operator");
  if (cfg.ensemble.magnetization_density != 0.0)
    throw InvalidArgument("the Laplace report needs a zero magnetization target");
  LaplaceResult out;
  for (int n : cfg.sizes) {
    const SizedSystem sys = prepare_system(cfg, n);
    const auto& table = sys.table;
    const auto t = cfg.operator_for(n);
    const auto diag = diagonal_reduced_elements(t, table, ReducedOptions{0.1, cfg.threads});
    LaplaceRecord r;
    r.n = n;
    r.energy = ensemble_energy(cfg, table);
    NatsParams p;
    try {
      p = solve_nats(table, r.energy, 0.0);
    } catch (const InfeasibleTarget& e) {
      out.skipped.push_back({n, e.what()});
      continue;
    }
    r.beta = p.beta;
    r.exact = thermal_average(diag, 0, table, p);

    // Local linear fit T(E_alpha, s_alpha) ~ a + b s over an energy window.
    const double half_width = 2.0 * cfg.stats.bins.energy;
    std::vector<double> xs, ys;
    for (const auto& mu : table.multiplets())
      if (std::abs(mu.energy - r.energy) <= half_width && diag.value[mu.label]) {
        xs.push_back(mu.spin.value());
        ys.push_back(*diag.value[mu.label]);
      }
    bool distinct = false;
    for (double x : xs) distinct = distinct || x != xs.front();
    if (xs.size() < 3 || !distinct) {
      const std::string why = "entropy surface too sparse near the target energy";
      say(log, fmt::format("N={}: skipped: {}", n, why));
      out.skipped.push_back({n, why});
      continue;
    }
    const auto fit = least_squares(xs, ys);
    r.intercept = fit.intercept;
    r.spin_slope = fit.slope;

    // Gaussian-weighted mean spin from the binned multiplet density.
    const auto surface = entropy_surface(table, cfg.stats.bins.energy, cfg.stats.bins.spin);
    double num = 0.0, den = 0.0, shift = 0.0;
    bool first = true;
    for (int ie = 0; ie < surface.energy_bins(); ++ie)
      for (int is = 0; is < surface.spin_bins(); ++is) {
        if (surface.count(ie, is) == 0) continue;
        const double x = -p.beta * surface.bin_center_energy(ie);
        if (first || x > shift) shift = x;
        first = false;
      }
    for (int ie = 0; ie < surface.energy_bins(); ++ie)
      for (int is = 0; is < surface.spin_bins(); ++is) {
        const int c = surface.count(ie, is);
        if (c == 0) continue;
        const double s = representative_spin(is, cfg.stats.bins.spin, n);
        const double w = c * (2.0 * s + 1.0) * std::exp(-p.beta * surface.bin_center_energy(ie) - shift);
        num += w * s;
        den += w;
      }
    r.mean_spin_surface = num / den;
    const auto dist = nats_distribution(table, p);
    for (std::size_t i = 0; i < dist.p.size(); ++i) r.mean_spin_exact += dist.p[i] * dist.spin[i];
    r.laplace = r.intercept + r.spin_slope * r.mean_spin_surface;
    r.gap = r.exact - r.laplace;
    say(log, fmt::format("N={}: exact={:.6g} laplace={:.6g}", n, r.exact, r.laplace));
    out.records.push_back(r);
  }
  return out;
}

EthStatsResult run_eth_stats(const ExperimentConfig& cfg, const std::filesystem::path* out_dir,
                             const LogFn& log) {
  EthStatsResult out;
  std::vector<SpectrumTable> tables;
  std::vector<DiagonalReducedElements> diags;
  std::optional<CsvWriter> summary_csv;
  if (out_dir)
    summary_csv.emplace(*out_dir / "eth_summary.csv",
                        std::vector<std::string>{"N", "mid_energy", "mid_stddev", "defined_bins",
                                                 "max_spread", "offdiag_samples",
                                                 "offdiag_residual_mean", "offdiag_residual_variance",
                                                 "offdiag_skipped"});
  for (int n : cfg.sizes) {
    SizedSystem sys = prepare_system(cfg, n);
    const auto& table = sys.table;
    const auto t = cfg.operator_for(n);
    auto diag = diagonal_reduced_elements(t, table, ReducedOptions{0.1, cfg.threads});
    const auto fit = eth_diagonal_fit(diag, table, cfg.stats.bins);
    EthSizeSummary s;
    s.n = n;
    s.mid_energy = trace_energy(table);
    s.mid_stddev = fit.pooled_stddev_at(s.mid_energy);
    s.max_spread = diag.max_spread();
    for (const auto& b : fit.bins) s.defined_bins += b.defined;

    if (out_dir) {
      CsvWriter d(*out_dir / fmt::format("eth_diagonal_N{}.csv", n),
                  {"alpha", "E", "s", "value", "spread", "ie", "is", "residual"});
      for (const auto& mu : table.multiplets()) {
        const auto& v = diag.value[mu.label];
        if (!v) continue;
        const auto& bin = fit.bin_of_label[mu.label];
        d.row({static_cast<long long>(mu.label), mu.energy, mu.spin.value(), *v, diag.spread[mu.label],
               static_cast<long long>(bin ? bin->first : -1), static_cast<long long>(bin ? bin->second : -1),
               fit.residuals[mu.label].value_or(std::nan(""))});
      }
      CsvWriter b(*out_dir / fmt::format("eth_bins_N{}.csv", n),
                  {"ie", "is", "E_center", "s_low", "count", "mean", "stddev", "std_error", "defined"});
      for (const auto& bin : fit.bins)
        b.row({static_cast<long long>(bin.ie), static_cast<long long>(bin.is), bin.energy_center,
               bin.spin_low, static_cast<long long>(bin.count), bin.mean, bin.stddev, bin.std_error,
               static_cast<long long>(bin.defined)});
    }

    if (cfg.stats.offdiagonal && n <= cfg.stats.offdiagonal_max_sites) {
      const auto full = reduced_elements(t, table, ReducedOptions{0.1, cfg.threads});
      const auto surface = entropy_surface(table, cfg.stats.bins.energy, cfg.stats.bins.spin);
      auto od = eth_offdiagonal_stats(full, table, surface, cfg.stats.bins);
      s.max_spread = std::max(s.max_spread, full.max_spread());
      if (out_dir) {
        CsvWriter o(*out_dir / fmt::format("eth_offdiag_bins_N{}.csv", n),
                    {"i_omega", "omega_low", "nu", "count", "mean_abs_scaled", "rms_scaled",
                     "residual_mean", "residual_variance"});
        for (const auto& bin : od.bins)
          o.row({static_cast<long long>(bin.i_omega), bin.i_omega * cfg.stats.bins.energy,
                 0.5 * bin.twice_nu, static_cast<long long>(bin.count), bin.mean_abs, bin.rms,
                 bin.residual_mean, bin.residual_variance});
      }
      od.samples.clear();
      od.samples.shrink_to_fit();
      s.offdiagonal = std::move(od);
    }
    if (summary_csv) {
      const auto& od = s.offdiagonal;
      long long samples = 0;
      if (od)
        for (const auto& b : od->bins) samples += b.count;
      const double nan = std::nan("");
      summary_csv->row({static_cast<long long>(n), s.mid_energy, s.mid_stddev.value_or(nan),
                        static_cast<long long>(s.defined_bins), s.max_spread, samples,
                        od ? od->residual_mean : nan, od ? od->residual_variance : nan,
                        static_cast<long long>(od ? od->skipped_undefined_entropy : 0)});
    }
    say(log, fmt::format("N={}: mid-spectrum stddev {}", n,
                         s.mid_stddev ? fmt::format("{:.6g}", *s.mid_stddev) : std::string("undefined")));
    out.sizes.push_back(std::move(s));
    tables.push_back(std::move(sys.table));
    diags.push_back(std::move(diag));
  }
  if (cfg.sizes.size() >= 3) {
    std::vector<SizedDiagonal> sized;
    for (std::size_t i = 0; i < tables.size(); ++i) sized.push_back({&tables[i], &diags[i]});
    try {
      out.spin_slope = spin_density_slope(sized, cfg.stats.density_low, cfg.stats.density_high);
      if (out_dir) {
        CsvWriter w(*out_dir / "spin_density_slope.csv",
                    {"samples", "slope", "slope_stderr", "slope_ci_low", "slope_ci_high", "intercept",
                     "intercept_stderr", "intercept_ci_low", "intercept_ci_high"});
        const auto& s = *out.spin_slope;
        w.row({static_cast<long long>(s.samples), s.fit.slope, s.fit.slope_stderr, s.slope_ci_low,
               s.slope_ci_high, s.fit.intercept, s.fit.intercept_stderr, s.intercept_ci_low,
               s.intercept_ci_high});
      }
    } catch (const InvalidArgument& e) {
      out.spin_slope_note = e.what();
    }
  } else {
    out.spin_slope_note = "spin-density slope needs at least three sizes";
  }
  return out;
}

std::vector<ThermalRecord> run_thermal_report(const ExperimentConfig& cfg, const LogFn& log) {
  std::vector<ThermalRecord> out;
  for (int n : cfg.sizes) {
    const SizedSystem sys = prepare_system(cfg, n);
    const auto t = cfg.operator_for(n);
    const auto diag = diagonal_reduced_elements(t, sys.table, ReducedOptions{0.1, cfg.threads});
    const double e = ensemble_energy(cfg, sys.table);
    const double m = cfg.ensemble.magnetization_density * n;
    const auto p = solve_nats(sys.table, e, m);
    for (int q = -t.rank; q <= t.rank; ++q) {
      ThermalRecord r;
      r.n = n;
      r.q = q;
      r.energy = e;
      r.magnetization = m;
      r.beta = p.beta;
      r.mu = p.mu();
      r.value = thermal_average(diag, q, sys.table, p);
      if (n <= kDirectOracleMaxSites)
        r.direct = thermal_trace_direct(t.component(q), sys.h, sys.ops, p).real();
      out.push_back(r);
    }
    say(log, fmt::format("N={}: beta={:.6g} mu={:.6g}", n, p.beta, p.mu()));
  }
  return out;
}

std::vector<TimeAverageRecord> run_time_average_report(const ExperimentConfig& cfg, const LogFn& log) {
  std::vector<TimeAverageRecord> out;
  for (int n : cfg.sizes) {
    const SizedSystem sys = prepare_system(cfg, n);
    const auto t = cfg.operator_for(n);
    const auto diag = diagonal_reduced_elements(t, sys.table, ReducedOptions{0.1, cfg.threads});
    const auto built = build_state(cfg.state_request(sys.spec), sys.table);
    const double tol = sys.table.degeneracy_tolerance();
    for (int q = -t.rank; q <= t.rank; ++q) {
      TimeAverageRecord r;
      r.n = n;
      r.q = q;
      r.value = time_average(t, q, built.coefficients, sys.table, diag, tol);
      if (n <= kDirectOracleMaxSites)
        r.dephased = time_average_dephased(t.component(q), built.coefficients, sys.table, tol);
      out.push_back(r);
    }
    say(log, fmt::format("N={}: {}", n, built.description));
  }
  return out;
}

void write_scaling_csv(const ScalingResult& r, const std::filesystem::path& dir) {
  {
    CsvWriter w(dir / "sweep.csv", {"N", "time_avg", "time_avg_imag", "thermal_avg", "deviation", "E",
                                    "M", "beta", "mu"});
    for (const auto& x : r.records)
      w.row({static_cast<long long>(x.n), x.time_avg, x.time_avg_imag, x.thermal_avg, x.deviation,
             x.energy, x.magnetization, x.beta, x.mu});
  }
  CsvWriter f(dir / "sweep_fit.csv", {"slope", "slope_stderr", "points", "excluded_zero", "skipped_sizes"});
  const auto& s = r.slope;
  f.row({s.fit ? s.fit->slope : std::nan(""), s.fit ? s.fit->slope_stderr : std::nan(""),
         static_cast<long long>(s.fit ? s.fit->n : 0), static_cast<long long>(s.excluded_zero),
         static_cast<long long>(r.skipped.size())});
}

void write_anomaly_csv(const AnomalyResult& r, const std::filesystem::path& dir) {
  {
    CsvWriter w(dir / "anomaly.csv",
                {"N", "state", "s_A", "m_bar", "alpha", "E_A", "beta", "time_avg", "thermal_avg",
                 "deviation", "cg_prefactor", "reduced_element", "factorized"});
    for (const auto& x : r.records)
      w.row({static_cast<long long>(x.n), x.state, x.spin.to_string(), x.m_bar.to_string(),
             static_cast<long long>(x.label), x.energy, x.beta, x.time_avg, x.thermal_avg, x.deviation,
             x.cg_prefactor, x.reduced_element, x.factorized});
  }
  CsvWriter f(dir / "anomaly_fit.csv", {"slope", "slope_stderr", "points", "excluded_zero", "skipped_sizes"});
  const auto& s = r.slope;
  f.row({s.fit ? s.fit->slope : std::nan(""), s.fit ? s.fit->slope_stderr : std::nan(""),
         static_cast<long long>(s.fit ? s.fit->n : 0), static_cast<long long>(s.excluded_zero),
         static_cast<long long>(r.skipped.size())});
}

void write_laplace_csv(const LaplaceResult& r, const std::filesystem::path& dir) {
  CsvWriter w(dir / "laplace.csv", {"N", "E", "beta", "exact", "intercept", "spin_slope",
                                    "mean_spin_surface", "mean_spin_exact", "laplace", "gap"});
  for (const auto& x : r.records)
    w.row({static_cast<long long>(x.n), x.energy, x.beta, x.exact, x.intercept, x.spin_slope,
           x.mean_spin_surface, x.mean_spin_exact, x.laplace, x.gap});
}

void write_thermal_csv(const std::vector<ThermalRecord>& r, const std::filesystem::path& dir) {
  CsvWriter w(dir / "thermal.csv", {"N", "q", "E", "M", "beta", "mu", "thermal_avg", "direct_trace"});
  for (const auto& x : r)
    w.row({static_cast<long long>(x.n), static_cast<long long>(x.q), x.energy, x.magnetization, x.beta,
           x.mu, x.value, x.direct.value_or(std::nan(""))});
}

void write_time_average_csv(const std::vector<TimeAverageRecord>& r, const std::filesystem::path& dir) {
  CsvWriter w(dir / "time_avg.csv", {"N", "q", "re", "im", "dephased_re", "dephased_im"});
  for (const auto& x : r)
    w.row({static_cast<long long>(x.n), static_cast<long long>(x.q), x.value.real(), x.value.imag(),
           x.dephased ? x.dephased->real() : std::nan(""), x.dephased ? x.dephased->imag() : std::nan("")});
}

}  // namespace naeth
