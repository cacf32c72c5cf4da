#pragma once

#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace naeth {

using Complex = std::complex<double>;
using SparseComplex = Eigen::SparseMatrix<Complex>;

enum class Boundary { open, periodic };

/// SU(2)-invariant J1-J2 Heisenberg chain of spin-1/2 sites:
///   H = sum_j J1_j s_j . s_{j+1} + sum_j J2_j s_j . s_{j+2}.
struct SpinModelSpec {
  int n_sites = 0;
  std::vector<double> nn_couplings;
  std::vector<double> nnn_couplings;  // empty means no next-nearest bonds
  Boundary boundary = Boundary::open;
  std::uint64_t rng_seed = 0;

  /// Throws InvalidArgument on inconsistent coupling lengths.
  void validate() const;
  /// Heuristic flag: some J2 != 0 or nonuniform J1. Not a proof.
  bool nonintegrable() const;

  /// J1_j ~ U[0.8, 1.2] from rng_seed, J2 = 0.4, open chain.
  static SpinModelSpec default_model(int n_sites, std::uint64_t seed);
  /// J1 = -1, J2 = -0.3, open chain.
  static SpinModelSpec ferromagnetic(int n_sites);
  static SpinModelSpec uniform(int n_sites, double j1, double j2, Boundary boundary);
};

/// A 2^N x 2^N operator in the computational basis (bit j set = site j up).
struct OperatorMatrix {
  int n_sites = 0;
  SparseComplex matrix;
  bool hermitian = false;

  Eigen::Index dimension() const { return matrix.rows(); }
};

struct SpinOperators {
  OperatorMatrix sx, sy, sz, splus, sminus, s_squared;
};

/// Largest chain the full-space builders accept by default.
inline constexpr int kDefaultMaxSites = 16;

OperatorMatrix build_hamiltonian(const SpinModelSpec& spec, int max_sites = kDefaultMaxSites);
SpinOperators build_spin_operators(int n_sites, int max_sites = kDefaultMaxSites);

// Single-site and two-site building blocks, full Hilbert space.
SparseComplex site_sz(int n_sites, int site);
SparseComplex site_splus(int n_sites, int site);
SparseComplex site_sminus(int n_sites, int site);
SparseComplex site_dot(int n_sites, int i, int j);  // s_i . s_j
SparseComplex identity_operator(int n_sites);

struct SymmetryReport {
  double comm_h_sx = 0.0, comm_h_sy = 0.0, comm_h_sz = 0.0;
  /// max over cyclic (a,b,c) of ||[S_a, S_b] - i S_c||_max
  double algebra_closure = 0.0;
  /// ||[S_x, S_y]||_max; must be nonzero for genuinely non-Abelian charges.
  double noncommutation_witness = 0.0;
  bool pass = false;
};

SymmetryReport verify_symmetry(const OperatorMatrix& h, const SpinOperators& ops,
                               double tol = 1e-12);

/// Largest |entry| of a sparse matrix.
double max_abs(const SparseComplex& a);
/// max |A - A^dagger| entrywise.
double hermiticity_defect(const SparseComplex& a);

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

}  // namespace naeth
