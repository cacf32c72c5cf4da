#include "naeth/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "naeth/errors.hpp"
#include "naeth/linalg.hpp"

namespace naeth {

namespace {

// Eigenvalues of S_- S_+ on the S_z = s sector are s'(s'+1) - s(s+1) for
// s' >= s, so the kernel is separated from the rest by a gap of 2(s+1) >= 2.
constexpr double kKernelThreshold = 1.0;

struct SectorOperators {
  SectorBlocks h, splus, sminus;
};

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0.0) v = -v;
}

std::optional<SpinBlock> solve_spin(const SectorOperators& ops, const SzDecomposition& basis,
                                    int twice_s) {
  const int n = basis.n_sites();
  const auto d = static_cast<Eigen::Index>(basis.by_twice_m(twice_s).size());
  const std::string where = "spin sector 2s=" + std::to_string(twice_s);

  Eigen::MatrixXd hw_basis;
  if (twice_s + 2 <= n) {
    const auto expected = d - static_cast<Eigen::Index>(basis.by_twice_m(twice_s + 2).size());
    if (expected <= 0) return std::nullopt;
    const SparseReal* raise = ops.splus.find(twice_s + 2, twice_s);
    if (raise == nullptr) throw SolverError("missing S_+ block in " + where);
    const Eigen::MatrixXd gram = Eigen::MatrixXd(SparseReal(raise->transpose() * *raise));
    const SymmetricEigen eig = symmetric_eigensolve(gram, "highest-weight kernel, " + where);
    Eigen::Index kernel = 0;
    while (kernel < d && eig.values(kernel) < kKernelThreshold) ++kernel;
    if (kernel != expected) {
      throw SolverError("highest-weight subspace of " + where + " has dimension " +
                        std::to_string(kernel) + ", expected " + std::to_string(expected));
    }
    hw_basis = eig.vectors.leftCols(kernel);
  } else {
    hw_basis = Eigen::MatrixXd::Identity(d, d);
  }

  Eigen::MatrixXd h_hw;
  if (const SparseReal* hs = ops.h.find(twice_s, twice_s)) {
    const Eigen::MatrixXd hv = *hs * hw_basis;
    h_hw = hw_basis.transpose() * hv;
    h_hw = 0.5 * (h_hw + h_hw.transpose()).eval();
  } else {
    h_hw = Eigen::MatrixXd::Zero(hw_basis.cols(), hw_basis.cols());
  }
  const SymmetricEigen eig = symmetric_eigensolve(h_hw, "Hamiltonian, " + where);

  SpinBlock block;
  block.spin = HalfInteger::from_twice(twice_s);
  block.energies.assign(eig.values.data(), eig.values.data() + eig.values.size());
  block.vectors.resize(twice_s + 1);
  Eigen::MatrixXd top = hw_basis * eig.vectors;
  for (Eigen::Index c = 0; c < top.cols(); ++c) fix_sign(top.col(c));
  block.vectors[twice_s] = std::move(top);

  for (int tm = twice_s; tm > -twice_s; tm -= 2) {
    const SparseReal* lower = ops.sminus.find(tm - 2, tm);
    if (lower == nullptr) throw SolverError("missing S_- block in " + where);
    const double norm = 0.5 * std::sqrt(static_cast<double>(twice_s * (twice_s + 2) - tm * (tm - 2)));
    const auto& current = block.vectors[(tm + twice_s) / 2];
    block.vectors[(tm + twice_s) / 2 - 1] = (*lower * current) / norm;
  }
  return block;
}

}  // namespace

SpectrumTable::SpectrumTable(int n_sites, std::uint64_t model_spec_hash,
                             std::vector<SpinBlock> blocks, double degeneracy_tolerance)
    : n_sites_(n_sites),
      model_spec_hash_(model_spec_hash),
      degeneracy_tolerance_(degeneracy_tolerance),
      basis_(std::make_shared<SzDecomposition>(n_sites)),
      blocks_(std::move(blocks)) {
  std::sort(blocks_.begin(), blocks_.end(),
            [](const SpinBlock& a, const SpinBlock& b) { return a.spin < b.spin; });
  int label = 0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    auto& block = blocks_[b];
    if (static_cast<int>(block.vectors.size()) != block.spin.twice() + 1) {
      throw InvalidArgument("SpectrumTable: block needs 2s+1 vector sets");
    }
    for (int t = 0; t <= block.spin.twice(); ++t) {
      const auto& sec = basis_->by_twice_m(2 * t - block.spin.twice());
      if (block.vectors[t].rows() != static_cast<Eigen::Index>(sec.size()) ||
          block.vectors[t].cols() != block.count()) {
        throw InvalidArgument("SpectrumTable: vector block has wrong shape");
      }
    }
    block.first_label = label;
    for (int c = 0; c < block.count(); ++c) {
      SpinMultiplet mp;
      mp.label = label++;
      mp.energy = block.energies[c];
      mp.spin = block.spin;
      mp.block = static_cast<int>(b);
      mp.column = c;
      multiplets_.push_back(mp);
    }
    for (int c = 0; c + 1 < block.count(); ++c) {
      if (std::abs(block.energies[c + 1] - block.energies[c]) < degeneracy_tolerance_) {
        multiplets_[block.first_label + c].degenerate_same_spin = true;
        multiplets_[block.first_label + c + 1].degenerate_same_spin = true;
      }
    }
  }
}

std::optional<int> SpectrumTable::block_of_spin(HalfInteger s) const {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].spin == s) return static_cast<int>(b);
  }
  return std::nullopt;
}

Eigen::VectorXd SpectrumTable::sector_vector(int label, HalfInteger m) const {
  const auto& mp = multiplet(label);
  if (!valid_projection(mp.spin, m)) {
    throw InvalidArgument("sector_vector: m=" + m.to_string() + " invalid for s=" +
                          mp.spin.to_string());
  }
  return blocks_[mp.block].at_m(m).col(mp.column);
}

Eigen::VectorXd SpectrumTable::full_vector(int label, HalfInteger m) const {
  const Eigen::VectorXd local = sector_vector(label, m);
  const auto& sec = basis_->by_twice_m(m.twice());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index{1} << n_sites_);
  for (std::size_t i = 0; i < sec.size(); ++i) out(sec.state(i)) = local(static_cast<Eigen::Index>(i));
  return out;
}

std::size_t SpectrumTable::total_dimension() const {
  std::size_t total = 0;
  for (const auto& mp : multiplets_) total += static_cast<std::size_t>(mp.spin.twice() + 1);
  return total;
}

double SpectrumTable::min_energy() const {
  double e = std::numeric_limits<double>::infinity();
  for (const auto& mp : multiplets_) e = std::min(e, mp.energy);
  return e;
}

double SpectrumTable::max_energy() const {
  double e = -std::numeric_limits<double>::infinity();
  for (const auto& mp : multiplets_) e = std::max(e, mp.energy);
  return e;
}

SpectrumTable decompose(const OperatorMatrix& h, const SpinOperators& ops,
                        const DecomposeOptions& options) {
  const int n = h.n_sites;
  if (ops.sz.n_sites != n) throw InvalidArgument("decompose: n_sites mismatch");
  const SymmetryReport sym = verify_symmetry(h, ops);
  if (!sym.pass) {
    throw SolverError("decompose: Hamiltonian is not SU(2) symmetric (max |[H,S_a]| = " +
                      std::to_string(std::max({sym.comm_h_sx, sym.comm_h_sy, sym.comm_h_sz})) +
                      ")");
  }
  const SzDecomposition basis(n);
  const SectorOperators sector_ops{SectorBlocks(h, basis), SectorBlocks(ops.splus, basis),
                                   SectorBlocks(ops.sminus, basis)};

  std::vector<int> spins;
  for (int ts = n % 2; ts <= n; ts += 2) spins.push_back(ts);
  std::vector<std::optional<SpinBlock>> solved(spins.size());

  const int threads = std::clamp(options.threads, 1, static_cast<int>(spins.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < spins.size(); ++i) solved[i] = solve_spin(sector_ops, basis, spins[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(spins.size());
    {
      std::vector<std::jthread> pool;
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < spins.size(); i = next++) {
            try {
              solved[i] = solve_spin(sector_ops, basis, spins[i]);
            } catch (...) {
              errors[i] = std::current_exception();
            }
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<SpinBlock> blocks;
  for (auto& b : solved) {
    if (b) blocks.push_back(std::move(*b));
  }
  const double scale = std::max(max_abs(h.matrix), 1e-300);
  return SpectrumTable(n, options.model_spec_hash, std::move(blocks),
                       options.degeneracy_rel_tol * scale);
}

// ---------------------------------------------------------------------------
// entropy surface

EntropySurface::EntropySurface(double e_origin, double de, double ds, int n_e, int n_s)
    : e_origin_(e_origin), de_(de), ds_(ds), n_e_(n_e), n_s_(n_s),
      counts_(static_cast<std::size_t>(n_e) * n_s, 0) {
  if (!(de > 0.0) || !(ds > 0.0)) throw InvalidArgument("entropy_surface: bin widths must be > 0");
}

std::optional<std::pair<int, int>> EntropySurface::bin_of(double energy, double spin) const {
  const auto ie = static_cast<int>(std::floor((energy - e_origin_) / de_ + 1e-12));
  const auto is = static_cast<int>(std::floor(spin / ds_ + 1e-12));
  if (ie < 0 || ie >= n_e_ || is < 0 || is >= n_s_) return std::nullopt;
  return std::make_pair(ie, is);
}

std::optional<double> EntropySurface::entropy(int ie, int is) const {
  const int c = count(ie, is);
  if (c == 0) return std::nullopt;
  return std::log(c / de_);
}

std::optional<double> EntropySurface::entropy_at(double energy, double spin) const {
  const auto bin = bin_of(energy, spin);
  if (!bin) return std::nullopt;
  return entropy(bin->first, bin->second);
}

void EntropySurface::add(double energy, double spin) {
  const auto bin = bin_of(energy, spin);
  if (!bin) throw InvalidArgument("EntropySurface::add: point outside grid");
  ++counts_[index(bin->first, bin->second)];
}

int EntropySurface::total_count() const { return std::accumulate(counts_.begin(), counts_.end(), 0); }

double EntropySurface::integrated_count() const {
  double total = 0.0;
  for (int ie = 0; ie < n_e_; ++ie) {
    for (int is = 0; is < n_s_; ++is) {
      if (auto s = entropy(ie, is)) total += std::exp(*s) * de_;
    }
  }
  return total;
}

EntropySurface entropy_surface(const SpectrumTable& table, double de, double ds) {
  if (!(de > 0.0) || !(ds > 0.0)) throw InvalidArgument("entropy_surface: bin widths must be > 0");
  if (table.size() == 0) throw InvalidArgument("entropy_surface: empty spectrum");
  const double origin = std::floor(table.min_energy() / de) * de;
  const int n_e = static_cast<int>(std::floor((table.max_energy() - origin) / de + 1e-12)) + 1;
  double s_max = 0.0;
  for (const auto& mp : table.multiplets()) s_max = std::max(s_max, mp.spin.value());
  const int n_s = static_cast<int>(std::floor(s_max / ds + 1e-12)) + 1;
  EntropySurface surface(origin, de, ds, n_e, n_s);
  for (const auto& mp : table.multiplets()) surface.add(mp.energy, mp.spin.value());
  return surface;
}

// ---------------------------------------------------------------------------
// degeneracies

namespace {

std::vector<int> labels_by_energy(const SpectrumTable& table) {
  std::vector<int> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return table.multiplet(a).energy < table.multiplet(b).energy;
  });
  return order;
}

}  // namespace

DegeneracyReport degeneracy_report(const SpectrumTable& table, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("degeneracy_report: tol must be > 0");
  DegeneracyReport report;
  for (const auto& mp : table.multiplets()) {
    if (mp.spin.twice() > 0) report.forced.emplace_back(mp.label, mp.spin.twice() + 1);
  }
  const auto order = labels_by_energy(table);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& a = table.multiplet(order[i]);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto& b = table.multiplet(order[j]);
      const double gap = b.energy - a.energy;
      if (gap >= tol) break;
      AccidentalDegeneracy acc{std::min(a.label, b.label), std::max(a.label, b.label), gap,
                               a.spin == b.spin};
      if (acc.same_spin) ++report.same_spin_hazards;
      report.accidental.push_back(acc);
    }
  }
  return report;
}

std::vector<std::vector<int>> energy_classes(const SpectrumTable& table, double tol) {
  const auto order = labels_by_energy(table);
  std::vector<std::vector<int>> classes;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || table.multiplet(order[i]).energy - table.multiplet(order[i - 1]).energy >= tol) {
      classes.emplace_back();
    }
    classes.back().push_back(order[i]);
  }
  for (auto& c : classes) std::sort(c.begin(), c.end());
  return classes;
}

// ---------------------------------------------------------------------------
// digests

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

template <typename T>
std::uint64_t mix(std::uint64_t h, const T& value) {
  return fnv1a(&value, sizeof(T), h);
}

}  // namespace

std::uint64_t table_digest(const SpectrumTable& table) {
  std::uint64_t h = fnv1a(nullptr, 0);
  h = mix(h, table.n_sites());
  h = mix(h, table.model_spec_hash());
  for (const auto& block : table.blocks()) {
    h = mix(h, block.spin.twice());
    h = fnv1a(block.energies.data(), block.energies.size() * sizeof(double), h);
    for (const auto& v : block.vectors) h = fnv1a(v.data(), v.size() * sizeof(double), h);
  }
  return h;
}

std::uint64_t model_spec_hash(const SpinModelSpec& spec) {
  std::uint64_t h = fnv1a(nullptr, 0);
  h = mix(h, spec.n_sites);
  h = mix(h, static_cast<int>(spec.boundary));
  h = mix(h, spec.nn_couplings.size());
  h = fnv1a(spec.nn_couplings.data(), spec.nn_couplings.size() * sizeof(double), h);
  h = mix(h, spec.nnn_couplings.size());
  h = fnv1a(spec.nnn_couplings.data(), spec.nnn_couplings.size() * sizeof(double), h);
  h = mix(h, spec.rng_seed);
  return h;
}

}  // namespace naeth
