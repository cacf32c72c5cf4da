#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "naeth/fit.hpp"
#include "naeth/model.hpp"
#include "naeth/spectral.hpp"
#include "naeth/tensor.hpp"

namespace naeth {

// ---------------------------------------------------------------------------
// non-Abelian thermal state

/// Weights exp(-beta (E_alpha - mu m)). Internally parametrized by
/// nu = beta * mu so that beta -> 0 stays regular.
struct NatsParams {
  double beta = 0.0;
  double nu = 0.0;
  double target_E = 0.0;
  double target_M = 0.0;
  double residual_E = 0.0;
  double residual_M = 0.0;
  int iterations = 0;

  double mu() const { return nu == 0.0 ? 0.0 : nu / beta; }
  static NatsParams from_beta_mu(double beta, double mu) {
    NatsParams p;
    p.beta = beta;
    p.nu = beta * mu;
    return p;
  }
};

struct NatsMoments {
  double log_z = 0.0;
  double energy = 0.0;
  double magnetization = 0.0;
  double var_energy = 0.0;
  double var_magnetization = 0.0;
  double covariance = 0.0;  // cov(E, m)
};

NatsMoments nats_moments(const SpectrumTable& table, double beta, double nu);

struct NatsSolveOptions {
  double tolerance = 1e-10;  // relative to max(1, |target|)
  int max_iterations = 200;
  double max_abs_parameter = 1e4;
};

/// Finds (beta, mu) reproducing <H> = target_E and <S_z> = target_M.
/// target_M == 0 forces mu = 0 and solves for beta alone. Throws
/// InfeasibleTarget outside the attainable region, SolverError on
/// non-convergence.
NatsParams solve_nats(const SpectrumTable& table, double target_E, double target_M,
                      const NatsSolveOptions& options = {});

/// True when <H> strictly decreases along the given ascending beta grid at
/// fixed mu.
bool energy_decreasing_in_beta(const SpectrumTable& table, double mu, const std::vector<double>& betas);

/// <T^(k)_q> in the NATS from diagonal reduced elements. Exactly 0.0 when
/// q != 0. Throws InvalidArgument when a needed diagonal element is missing.
double thermal_average(const DiagonalReducedElements& r, int q, const SpectrumTable& table,
                       const NatsParams& params);

/// Tr(op rho) with rho = exp(-beta H + nu S_z) / Z built by dense
/// diagonalization of the full 2^N matrix. Limited to max_sites.
Complex thermal_trace_direct(const OperatorMatrix& op, const OperatorMatrix& h,
                             const SpinOperators& ops, const NatsParams& params, int max_sites = 10);

// ---------------------------------------------------------------------------
// states

/// C_{alpha, m}; amplitudes[label][m + s].
struct StateCoefficients {
  int n_sites = 0;
  std::uint64_t model_spec_hash = 0;
  std::vector<Eigen::VectorXcd> amplitudes;

  double norm_squared() const;
  Complex at(int label, HalfInteger m) const;
};

StateCoefficients zero_state(const SpectrumTable& table);
/// Projection of a full-space vector onto the multiplet basis.
StateCoefficients from_full_vector(const Eigen::VectorXcd& psi, const SpectrumTable& table);
Eigen::VectorXcd to_full_vector(const StateCoefficients& c, const SpectrumTable& table);

enum class StateKind { eigenstate, anomalous_A, anomalous_B, singlet, product };

StateKind state_kind_from_string(const std::string& s);
std::string to_string(StateKind k);

struct StateRequest {
  StateKind kind = StateKind::product;
  /// anomalous states: s_A nearest spin_scale * sqrt(N).
  double spin_scale = 1.0;
  /// Target E/N; nullopt means Tr(H)/(N 2^N).
  std::optional<double> energy_density;
  /// anomalous_B: m-bar (default chosen from s_A).
  std::optional<HalfInteger> m_bar;
  /// eigenstate: label and m.
  int label = 0;
  HalfInteger m;
  /// product: M/N, the model couplings, and the optional brickwork.
  double magnetization_density = 0.0;
  const SpinModelSpec* model = nullptr;
  int brickwork_depth = 0;
  double brickwork_angle = 0.2;
  std::uint64_t brickwork_seed = 0;
};

struct BuiltState {
  StateCoefficients coefficients;
  /// anomalous and singlet states: the multiplet used.
  std::optional<int> label;
  HalfInteger spin;
  HalfInteger m_bar;
  std::string description;
};

BuiltState build_state(const StateRequest& request, const SpectrumTable& table);

/// Full-space product state of single-site spinors with polar angles theta_j
/// (azimuth 0).
Eigen::VectorXcd product_state(const std::vector<double>& thetas);
/// Applies exp(-i phi s_i . s_j) in place.
void apply_heisenberg_gate(Eigen::VectorXcd& psi, int n_sites, int i, int j, double phi);

// ---------------------------------------------------------------------------
// time averages

/// Infinite-time average of <T^(k)_q>: the diagonal sum over multiplets plus
/// cross terms between multiplets whose energies agree within `tol`.
Complex time_average(const SphericalTensorFamily& t, int q, const StateCoefficients& state,
                     const SpectrumTable& table, const DiagonalReducedElements& diag,
                     double tol);

/// Same quantity by explicit dephasing: sum over energy classes G of
/// <psi_G| T_q |psi_G>, psi_G the projection of the state onto G.
Complex time_average_dephased(const OperatorMatrix& tq, const StateCoefficients& state,
                              const SpectrumTable& table, double tol);

// ---------------------------------------------------------------------------
// diagnostics

struct AmcReport {
  int n_sites = 0;
  double energy = 0.0, magnetization = 0.0;
  double var_h = 0.0, var_sz = 0.0, var_sx = 0.0, var_sy = 0.0;
};

AmcReport amc_check(const Eigen::VectorXcd& psi, const OperatorMatrix& h, const SpinOperators& ops);

struct AmcScaling {
  /// Slopes of log variance against log N (nullopt if a variance vanished).
  std::optional<LinearFit> var_h, var_sz, var_sx, var_sy;
};

AmcScaling amc_scaling(const std::vector<AmcReport>& reports);

/// Probability distribution over (E_alpha, m, s_alpha).
struct EnsembleDistribution {
  int n_sites = 0;
  std::vector<double> energy, m, spin, p;
};

EnsembleDistribution diagonal_distribution(const StateCoefficients& state, const SpectrumTable& table);
EnsembleDistribution nats_distribution(const SpectrumTable& table, const NatsParams& params);

struct MomentEntry {
  std::array<int, 3> order{};  // (A, B, C)
  double value = 0.0;
};

struct MomentReport {
  int n_sites = 0;
  double energy = 0.0, magnetization = 0.0;
  std::vector<MomentEntry> moments;  // all A + B + C <= max_order
  const MomentEntry* find(int a, int b, int c) const;
};

/// <(E_alpha - E)^A (m - M)^B (s_alpha - M)^C>_p.
MomentReport moment_check(const EnsembleDistribution& dist, int max_order);

struct MomentScalingEntry {
  std::array<int, 3> order{};
  std::optional<LinearFit> fit;  // log|moment| vs log N
  int excluded_zero = 0;
  int bound = 0;  // A + B + C - 1
  bool flagged = false;
};

/// Moments with |value| <= zero_floor * N^(A+B+C) are treated as vanishing
/// and excluded from the fit. A slope is flagged when it exceeds the bound
/// by more than twice its standard error.
std::vector<MomentScalingEntry> moment_scaling(const std::vector<MomentReport>& reports,
                                               double zero_floor = 1e-10);

}  // namespace naeth
