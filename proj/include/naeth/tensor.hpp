#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "naeth/fit.hpp"
#include "naeth/half_integer.hpp"
#include "naeth/model.hpp"
#include "naeth/spectral.hpp"

namespace naeth {

enum class TensorKind { identity, dipole, quadrupole, scalar };

TensorKind tensor_kind_from_string(const std::string& s);
std::string to_string(TensorKind kind);

/// The 2k+1 components T^(k)_q of a spherical tensor operator, with
///   [S_z, T_q] = q T_q,   [S_+-, T_q] = sqrt(k(k+1) - q(q+-1)) T_{q+-1},
///   T_q^dagger = (-1)^q T_{-q}.
struct SphericalTensorFamily {
  int n_sites = 0;
  int rank = 0;
  std::map<int, OperatorMatrix> components;  // q -> matrix
  int locality = 0;
  std::string description;

  HalfInteger rank_half() const { return HalfInteger::from_int(rank); }
  const OperatorMatrix& component(int q) const;
};

/// identity (k=0, no sites), dipole (k=1, one site j: T_0 = s_jz,
/// T_+-1 = -+ s_j+- / sqrt 2), quadrupole (k=2, sites i,j:
/// T_0 = 3 s_iz s_jz - s_i.s_j), scalar (k=0, sites i,j: T_0 = -s_i.s_j).
SphericalTensorFamily build_tensor(TensorKind kind, const std::vector<int>& sites, int n_sites);

struct TensorAlgebraReport {
  double sz_commutator = 0.0;      // max_q ||[S_z, T_q] - q T_q||_max
  double ladder_commutator = 0.0;  // max over +- and q
  double hermiticity = 0.0;        // max_q ||T_q^dagger - (-1)^q T_{-q}||_max
};

TensorAlgebraReport check_tensor_algebra(const SphericalTensorFamily& t, const SpinOperators& ops);

// ---------------------------------------------------------------------------
// reduced matrix elements

/// Relative spreads are measured against max(|mean|, this floor), so that
/// accidentally tiny elements are judged on absolute deviation.
inline constexpr double kSpreadFloor = 1e-4;

struct ReducedPairBlock {
  int row_block = 0, col_block = 0;
  Eigen::MatrixXd value;   // rows: multiplets of row_block, cols: of col_block
  Eigen::MatrixXd spread;
  bool defined = true;     // false if every probe CG vanished
  int probes = 0;
};

/// <alpha || T^(k) || alpha'> for every multiplet pair allowed by the
/// triangle rule, stored as dense spin-block pairs.
class ReducedElementTable {
 public:
  ReducedElementTable(int rank, const SpectrumTable& table, std::vector<ReducedPairBlock> blocks);

  int rank() const { return rank_; }
  /// nullopt when the pair is triangle-forbidden or undefined.
  std::optional<double> value(int alpha, int beta) const;
  std::optional<double> spread(int alpha, int beta) const;
  const std::vector<ReducedPairBlock>& blocks() const { return blocks_; }
  double max_spread() const;

 private:
  const ReducedPairBlock* find(int row_block, int col_block) const;
  int rank_;
  const SpectrumTable* table_;
  std::vector<ReducedPairBlock> blocks_;
  std::map<std::pair<int, int>, std::size_t> index_;
};

struct ReducedOptions {
  double cg_threshold = 0.1;  // probes need |CG| > threshold * max |CG|
  int threads = 1;
};

ReducedElementTable reduced_elements(const SphericalTensorFamily& t, const SpectrumTable& table,
                                     const ReducedOptions& options = {});

/// Diagonal elements <alpha || T || alpha> only; much cheaper.
struct DiagonalReducedElements {
  int rank = 0;
  std::vector<std::optional<double>> value;  // by label
  std::vector<double> spread;
  double max_spread() const;
};

DiagonalReducedElements diagonal_reduced_elements(const SphericalTensorFamily& t,
                                                  const SpectrumTable& table,
                                                  const ReducedOptions& options = {});

/// One pair, for cross terms between degenerate multiplets.
std::optional<double> reduced_element_pair(const SphericalTensorFamily& t,
                                           const SpectrumTable& table, int alpha, int beta,
                                           double cg_threshold = 0.1);

/// Largest |<alpha,m|T_q|alpha',m'>| over entries the Wigner-Eckart theorem
/// forces to zero (m != m'+q or triangle rule violated).
double max_selection_rule_violation(const SphericalTensorFamily& t, const SpectrumTable& table);

// ---------------------------------------------------------------------------
// ETH statistics

struct BinWidths {
  double energy = 0.5;
  double spin = 1.0;
  int min_count = 5;
};

struct DiagonalBin {
  int ie = 0, is = 0;
  double energy_center = 0.0;
  double spin_low = 0.0;
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double std_error = 0.0;
  bool defined = false;  // count >= min_count
};

struct DiagonalFit {
  int n_sites = 0;
  BinWidths widths;
  double energy_origin = 0.0;
  std::vector<DiagonalBin> bins;  // occupied bins only
  /// per label: value - bin mean (nullopt if element or bin undefined)
  std::vector<std::optional<double>> residuals;
  std::vector<std::optional<std::pair<int, int>>> bin_of_label;

  /// Within-bin standard deviation pooled over the spin bins of the energy
  /// slice containing `energy`. Bins with a single member add nothing; the
  /// slice needs at least min_count multiplets in total.
  std::optional<double> pooled_stddev_at(double energy) const;
};

DiagonalFit eth_diagonal_fit(const DiagonalReducedElements& r, const SpectrumTable& table,
                             const BinWidths& widths);

/// Tr(H) / 2^N, the infinite-temperature energy.
double trace_energy(const SpectrumTable& table);

struct OffDiagonalSample {
  int alpha = 0, beta = 0;
  double mean_energy = 0.0, omega = 0.0;
  double mean_spin = 0.0, nu = 0.0;
  double scaled = 0.0;      // <alpha||T||beta> * exp(S_th / 2)
  double normalized = 0.0;  // scaled / rms of its (omega, nu) bin
};

struct OffDiagonalBin {
  int i_omega = 0;
  int twice_nu = 0;
  int count = 0;
  double mean_abs = 0.0;  // |f_nu| estimate
  double rms = 0.0;
  double residual_mean = 0.0;
  double residual_variance = 0.0;
};

struct OffDiagonalStats {
  std::vector<OffDiagonalSample> samples;
  std::vector<OffDiagonalBin> bins;
  int skipped_undefined_entropy = 0;
  /// pooled over bins with at least min_count samples
  double residual_mean = 0.0;
  double residual_variance = 0.0;
  double max_abs_element = 0.0;
};

OffDiagonalStats eth_offdiagonal_stats(const ReducedElementTable& r, const SpectrumTable& table,
                                       const EntropySurface& entropy, const BinWidths& widths);

struct SizedDiagonal {
  const SpectrumTable* table = nullptr;
  const DiagonalReducedElements* elements = nullptr;
};

struct SpinDensitySlope {
  LinearFit fit;  // value = intercept + slope * (s / N)
  double slope_ci_low = 0.0, slope_ci_high = 0.0;
  double intercept_ci_low = 0.0, intercept_ci_high = 0.0;
  int samples = 0;
};

/// Fits diagonal reduced elements against s/N over multiplets whose energy
/// density E/N lies in [density_low, density_high], pooled across sizes.
SpinDensitySlope spin_density_slope(const std::vector<SizedDiagonal>& sizes, double density_low,
                                    double density_high);

}  // namespace naeth
