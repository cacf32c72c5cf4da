#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "naeth/basis.hpp"
#include "naeth/half_integer.hpp"
#include "naeth/model.hpp"

namespace naeth {

/// One energy eigenmultiplet (E_alpha, s_alpha). Its 2s+1 vectors live in
/// the owning SpectrumTable's spin block.
struct SpinMultiplet {
  int label = 0;
  double energy = 0.0;
  HalfInteger spin;
  int block = 0;     // index into SpectrumTable::blocks()
  int column = 0;    // column inside that block's vector matrices
  bool degenerate_same_spin = false;  // another multiplet with equal (E, s)
};

/// All multiplets of one spin value s, sorted by energy.
///
/// vectors[i] holds |alpha, m> for m = -s + i as columns of a
/// (sector dimension x count) matrix, expressed in the S_z = m sector basis
/// of SzDecomposition.
struct SpinBlock {
  HalfInteger spin;
  std::vector<double> energies;
  std::vector<Eigen::MatrixXd> vectors;
  int first_label = 0;

  int count() const { return static_cast<int>(energies.size()); }
  const Eigen::MatrixXd& at_m(HalfInteger m) const { return vectors.at((m + spin).twice() / 2); }
};

/// Simultaneous eigenbasis of {H, S^2, S_z} organized into multiplets.
/// Immutable after construction.
class SpectrumTable {
 public:
  SpectrumTable(int n_sites, std::uint64_t model_spec_hash, std::vector<SpinBlock> blocks,
                double degeneracy_tolerance);

  int n_sites() const { return n_sites_; }
  std::uint64_t model_spec_hash() const { return model_spec_hash_; }
  double degeneracy_tolerance() const { return degeneracy_tolerance_; }
  const SzDecomposition& basis() const { return *basis_; }

  const std::vector<SpinBlock>& blocks() const { return blocks_; }
  const std::vector<SpinMultiplet>& multiplets() const { return multiplets_; }
  const SpinMultiplet& multiplet(int label) const { return multiplets_.at(label); }
  std::size_t size() const { return multiplets_.size(); }
  /// Block index for spin s, or nullopt.
  std::optional<int> block_of_spin(HalfInteger s) const;

  /// |alpha, m> in the S_z = m sector basis.
  Eigen::VectorXd sector_vector(int label, HalfInteger m) const;
  /// |alpha, m> embedded in the full 2^N computational basis.
  Eigen::VectorXd full_vector(int label, HalfInteger m) const;

  /// Sum over multiplets of (2 s + 1).
  std::size_t total_dimension() const;
  double min_energy() const;
  double max_energy() const;

 private:
  int n_sites_;
  std::uint64_t model_spec_hash_;
  double degeneracy_tolerance_;
  std::shared_ptr<const SzDecomposition> basis_;
  std::vector<SpinBlock> blocks_;
  std::vector<SpinMultiplet> multiplets_;
};

struct DecomposeOptions {
  std::uint64_t model_spec_hash = 0;
  /// Relative to ||H||_max.
  double degeneracy_rel_tol = 1e-10;
  int threads = 1;
};

/// Highest-weight diagonalization per spin sector followed by the lowering
/// chain. Refuses (SolverError) if [H, S_a] != 0.
SpectrumTable decompose(const OperatorMatrix& h, const SpinOperators& ops,
                        const DecomposeOptions& options = {});

/// Binned multiplet density over (E, s): S_th = log(count / dE).
class EntropySurface {
 public:
  EntropySurface(double e_origin, double de, double ds, int n_e, int n_s);

  double energy_width() const { return de_; }
  double spin_width() const { return ds_; }
  double energy_origin() const { return e_origin_; }
  int energy_bins() const { return n_e_; }
  int spin_bins() const { return n_s_; }

  std::optional<std::pair<int, int>> bin_of(double energy, double spin) const;
  int count(int ie, int is) const { return counts_[index(ie, is)]; }
  /// nullopt for empty bins.
  std::optional<double> entropy(int ie, int is) const;
  std::optional<double> entropy_at(double energy, double spin) const;
  double bin_center_energy(int ie) const { return e_origin_ + (ie + 0.5) * de_; }
  double bin_low_spin(int is) const { return is * ds_; }

  void add(double energy, double spin);
  int total_count() const;
  /// sum over occupied bins of exp(S_th) * dE.
  double integrated_count() const;

 private:
  std::size_t index(int ie, int is) const { return static_cast<std::size_t>(ie) * n_s_ + is; }
  double e_origin_, de_, ds_;
  int n_e_, n_s_;
  std::vector<int> counts_;
};

EntropySurface entropy_surface(const SpectrumTable& table, double de, double ds);

struct AccidentalDegeneracy {
  int alpha = 0, beta = 0;
  double gap = 0.0;
  bool same_spin = false;
};

struct DegeneracyReport {
  /// (label, 2s+1) for every multiplet: degeneracy forced by SU(2).
  std::vector<std::pair<int, int>> forced;
  std::vector<AccidentalDegeneracy> accidental;
  int same_spin_hazards = 0;
};

DegeneracyReport degeneracy_report(const SpectrumTable& table, double tol);

/// Groups of multiplet labels whose energies chain together within `tol`
/// (single linkage). Every label appears in exactly one group.
std::vector<std::vector<int>> energy_classes(const SpectrumTable& table, double tol);

/// Deterministic 64-bit digest of the table contents (energies, spins,
/// vectors, model hash).
std::uint64_t table_digest(const SpectrumTable& table);

/// FNV-1a over raw bytes; used for model and table digests.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 14695981039346656037ull);

std::uint64_t model_spec_hash(const SpinModelSpec& spec);

}  // namespace naeth
