#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "naeth/config.hpp"
#include "naeth/ensembles.hpp"

namespace naeth {

using LogFn = std::function<void(const std::string&)>;

/// Model, operators and multiplet table at one size.
struct SizedSystem {
  SpinModelSpec spec;
  OperatorMatrix h;
  SpinOperators ops;
  SpectrumTable table;
  bool from_cache = false;
};

/// Builds H and S_a, then loads the spectrum from the cache directory when a
/// matching file exists, otherwise decomposes (and writes the cache).
SizedSystem prepare_system(const ExperimentConfig& cfg, int n, bool use_cache = true);

struct SkippedSize {
  int n = 0;
  std::string reason;
};

/// OLS of log|deviation| against log N; zero deviations excluded.
struct SlopeFit {
  std::optional<LinearFit> fit;
  int excluded_zero = 0;
};

SlopeFit fit_log_log(const std::vector<int>& sizes, const std::vector<double>& deviations);

struct SweepRecord {
  int n = 0;
  double time_avg = 0.0, time_avg_imag = 0.0;
  double thermal_avg = 0.0;
  double deviation = 0.0;  // time_avg - thermal_avg
  double energy = 0.0, magnetization = 0.0;
  double beta = 0.0, mu = 0.0;
};

struct ScalingResult {
  std::vector<SweepRecord> records;
  std::vector<SkippedSize> skipped;
  SlopeFit slope;
};

ScalingResult run_thermalization_sweep(const ExperimentConfig& cfg, const LogFn& log = {});

/// Recomputes every record from scratch (no cache) with the dephasing and,
/// for N <= 10, dense-trace oracles. Returns the largest discrepancy in the
/// deviation column.
double verify_scaling_result(const ExperimentConfig& cfg, const ScalingResult& result);

struct AnomalyRecord {
  int n = 0;
  std::string state;
  HalfInteger spin, m_bar;
  int label = 0;
  double energy = 0.0, beta = 0.0;
  double time_avg = 0.0, thermal_avg = 0.0, deviation = 0.0;
  double cg_prefactor = 0.0;   // sum_m C*_{m+q} C_m CG(s, m+q | s, m; k, q)
  double reduced_element = 0.0;
  double factorized = 0.0;     // cg_prefactor * reduced_element
};

struct AnomalyResult {
  std::vector<AnomalyRecord> records;
  std::vector<SkippedSize> skipped;
  SlopeFit slope;
};

AnomalyResult run_anomaly_experiment(const ExperimentConfig& cfg, const LogFn& log = {});

struct LaplaceRecord {
  int n = 0;
  double energy = 0.0, beta = 0.0;
  double exact = 0.0;           // thermal sum of the k = 0 operator
  double intercept = 0.0;       // T(E, 0) from the local fit
  double spin_slope = 0.0;      // dT/ds from the local fit
  double mean_spin_surface = 0.0;
  double mean_spin_exact = 0.0;
  double laplace = 0.0;         // intercept + spin_slope * mean_spin_surface
  double gap = 0.0;             // exact - laplace
};

struct LaplaceResult {
  std::vector<LaplaceRecord> records;
  std::vector<SkippedSize> skipped;
};

LaplaceResult run_laplace_report(const ExperimentConfig& cfg, const LogFn& log = {});

struct EthSizeSummary {
  int n = 0;
  double mid_energy = 0.0;
  std::optional<double> mid_stddev;
  double max_spread = 0.0;
  int defined_bins = 0;
  std::optional<OffDiagonalStats> offdiagonal;
};

struct EthStatsResult {
  std::vector<EthSizeSummary> sizes;
  std::optional<SpinDensitySlope> spin_slope;
  std::string spin_slope_note;
};

/// Diagonal fits per size, off-diagonal statistics up to the configured
/// size, and the pooled spin-density slope. Writes per-size CSVs when
/// `out_dir` is given.
EthStatsResult run_eth_stats(const ExperimentConfig& cfg, const std::filesystem::path* out_dir,
                             const LogFn& log = {});

struct ThermalRecord {
  int n = 0, q = 0;
  double energy = 0.0, magnetization = 0.0, beta = 0.0, mu = 0.0;
  double value = 0.0;
  std::optional<double> direct;  // dense trace, N <= 10
};

std::vector<ThermalRecord> run_thermal_report(const ExperimentConfig& cfg, const LogFn& log = {});

struct TimeAverageRecord {
  int n = 0, q = 0;
  Complex value;
  std::optional<Complex> dephased;  // N <= 10
};

std::vector<TimeAverageRecord> run_time_average_report(const ExperimentConfig& cfg, const LogFn& log = {});

// CSV emitters; one file per report.
void write_scaling_csv(const ScalingResult& r, const std::filesystem::path& dir);
void write_anomaly_csv(const AnomalyResult& r, const std::filesystem::path& dir);
void write_laplace_csv(const LaplaceResult& r, const std::filesystem::path& dir);
void write_thermal_csv(const std::vector<ThermalRecord>& r, const std::filesystem::path& dir);
void write_time_average_csv(const std::vector<TimeAverageRecord>& r, const std::filesystem::path& dir);

}  // namespace naeth
