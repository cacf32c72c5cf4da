#include "naeth/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "naeth/errors.hpp"

namespace naeth {

namespace {

using Triplet = Eigen::Triplet<Complex>;

std::size_t full_dim(int n_sites) { return std::size_t{1} << n_sites; }

void check_sites(int n_sites, int max_sites) {
  if (n_sites < 1) throw InvalidArgument("n_sites must be >= 1");
  if (n_sites > max_sites) {
    throw ResourceError("n_sites = " + std::to_string(n_sites) +
                        " exceeds the full-space limit of " + std::to_string(max_sites) +
                        " sites");
  }
}

void check_site(int n_sites, int site) {
  if (site < 0 || site >= n_sites) {
    throw InvalidArgument("site index " + std::to_string(site) + " out of range for " +
                          std::to_string(n_sites) + " sites");
  }
}

SparseComplex from_triplets(int n_sites, const std::vector<Triplet>& t) {
  const auto dim = static_cast<Eigen::Index>(full_dim(n_sites));
  SparseComplex m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Appends J * s_i . s_j.
void add_exchange(std::vector<Triplet>& t, int n_sites, int i, int j, double coupling) {
  if (coupling == 0.0) return;
  const std::uint32_t mask = (1u << i) | (1u << j);
  for (std::uint32_t s = 0; s < full_dim(n_sites); ++s) {
    const bool same = ((s >> i) & 1u) == ((s >> j) & 1u);
    t.emplace_back(s, s, coupling * (same ? 0.25 : -0.25));
    if (!same) t.emplace_back(s ^ mask, s, coupling * 0.5);
  }
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

SparseComplex commutator(const SparseComplex& a, const SparseComplex& b) {
  return SparseComplex(a * b) - SparseComplex(b * a);
}

}  // namespace

std::string to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw InvalidArgument("unknown boundary '" + s + "' (expected open or periodic)");
}

void SpinModelSpec::validate() const {
  if (n_sites < 2) throw InvalidArgument("SpinModelSpec: n_sites must be >= 2");
  const int n = n_sites;
  if (boundary == Boundary::periodic && n < 3) {
    throw InvalidArgument("SpinModelSpec: periodic chains need n_sites >= 3");
  }
  const std::size_t nn_expected = boundary == Boundary::open ? n - 1 : n;
  const std::size_t nnn_expected = boundary == Boundary::open ? std::max(n - 2, 0) : n;
  if (nn_couplings.size() != nn_expected) {
    throw InvalidArgument("SpinModelSpec: expected " + std::to_string(nn_expected) +
                          " nearest-neighbor couplings, got " +
                          std::to_string(nn_couplings.size()));
  }
  if (!nnn_couplings.empty() && nnn_couplings.size() != nnn_expected) {
    throw InvalidArgument("SpinModelSpec: expected 0 or " + std::to_string(nnn_expected) +
                          " next-nearest-neighbor couplings, got " +
                          std::to_string(nnn_couplings.size()));
  }
  for (double j : nn_couplings) {
    if (!std::isfinite(j)) throw InvalidArgument("SpinModelSpec: non-finite coupling");
  }
  for (double j : nnn_couplings) {
    if (!std::isfinite(j)) throw InvalidArgument("SpinModelSpec: non-finite coupling");
  }
}

bool SpinModelSpec::nonintegrable() const {
  const bool any_nnn = std::any_of(nnn_couplings.begin(), nnn_couplings.end(),
                                   [](double j) { return j != 0.0; });
  const bool nonuniform =
      !nn_couplings.empty() &&
      std::any_of(nn_couplings.begin(), nn_couplings.end(),
                  [&](double j) { return j != nn_couplings.front(); });
  return any_nnn || nonuniform;
}

SpinModelSpec SpinModelSpec::default_model(int n_sites, std::uint64_t seed) {
  SpinModelSpec spec;
  spec.n_sites = n_sites;
  spec.rng_seed = seed;
  spec.boundary = Boundary::open;
  std::mt19937_64 rng(seed);
  for (int j = 0; j + 1 < n_sites; ++j) spec.nn_couplings.push_back(0.8 + 0.4 * uniform01(rng));
  spec.nnn_couplings.assign(std::max(n_sites - 2, 0), 0.4);
  return spec;
}

SpinModelSpec SpinModelSpec::ferromagnetic(int n_sites) {
  return uniform(n_sites, -1.0, -0.3, Boundary::open);
}

SpinModelSpec SpinModelSpec::uniform(int n_sites, double j1, double j2, Boundary boundary) {
  SpinModelSpec spec;
  spec.n_sites = n_sites;
  spec.boundary = boundary;
  const int bonds = boundary == Boundary::open ? n_sites - 1 : n_sites;
  const int nnn_bonds = boundary == Boundary::open ? std::max(n_sites - 2, 0) : n_sites;
  spec.nn_couplings.assign(bonds, j1);
  if (j2 != 0.0) spec.nnn_couplings.assign(nnn_bonds, j2);
  return spec;
}

SparseComplex site_sz(int n_sites, int site) {
  check_site(n_sites, site);
  std::vector<Triplet> t;
  for (std::uint32_t s = 0; s < full_dim(n_sites); ++s) {
    t.emplace_back(s, s, ((s >> site) & 1u) ? 0.5 : -0.5);
  }
  return from_triplets(n_sites, t);
}

SparseComplex site_splus(int n_sites, int site) {
  check_site(n_sites, site);
  std::vector<Triplet> t;
  for (std::uint32_t s = 0; s < full_dim(n_sites); ++s) {
    if (!((s >> site) & 1u)) t.emplace_back(s | (1u << site), s, 1.0);
  }
  return from_triplets(n_sites, t);
}

SparseComplex site_sminus(int n_sites, int site) {
  return SparseComplex(site_splus(n_sites, site).adjoint());
}

SparseComplex site_dot(int n_sites, int i, int j) {
  check_site(n_sites, i);
  check_site(n_sites, j);
  if (i == j) throw InvalidArgument("site_dot: sites must differ");
  std::vector<Triplet> t;
  add_exchange(t, n_sites, i, j, 1.0);
  return from_triplets(n_sites, t);
}

SparseComplex identity_operator(int n_sites) {
  const auto dim = static_cast<Eigen::Index>(full_dim(n_sites));
  SparseComplex id(dim, dim);
  id.setIdentity();
  return id;
}

OperatorMatrix build_hamiltonian(const SpinModelSpec& spec, int max_sites) {
  spec.validate();
  check_sites(spec.n_sites, max_sites);
  const int n = spec.n_sites;
  std::vector<Triplet> t;
  for (std::size_t b = 0; b < spec.nn_couplings.size(); ++b) {
    const int i = static_cast<int>(b);
    add_exchange(t, n, i, (i + 1) % n, spec.nn_couplings[b]);
  }
  for (std::size_t b = 0; b < spec.nnn_couplings.size(); ++b) {
    const int i = static_cast<int>(b);
    add_exchange(t, n, i, (i + 2) % n, spec.nnn_couplings[b]);
  }
  OperatorMatrix h{n, from_triplets(n, t), true};
  h.matrix.prune(Complex(0.0));
  return h;
}

SpinOperators build_spin_operators(int n_sites, int max_sites) {
  check_sites(n_sites, max_sites);
  const auto dim = static_cast<Eigen::Index>(full_dim(n_sites));
  SparseComplex sz(dim, dim), sp(dim, dim);
  for (int j = 0; j < n_sites; ++j) {
    sz += site_sz(n_sites, j);
    sp += site_splus(n_sites, j);
  }
  SparseComplex sm = sp.adjoint();
  const Complex half_i(0.0, 0.5);
  SparseComplex sx = 0.5 * (sp + sm);
  SparseComplex sy = (sp - sm) * (-half_i);  // (S+ - S-) / (2i)
  SparseComplex s2 = SparseComplex(sx * sx) + SparseComplex(sy * sy) + SparseComplex(sz * sz);
  s2.prune(Complex(0.0), 1e-15);
  SpinOperators ops;
  ops.sx = {n_sites, sx, true};
  ops.sy = {n_sites, sy, true};
  ops.sz = {n_sites, sz, true};
  ops.splus = {n_sites, sp, false};
  ops.sminus = {n_sites, sm, false};
  ops.s_squared = {n_sites, s2, true};
  return ops;
}

double max_abs(const SparseComplex& a) {
  double out = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseComplex::InnerIterator it(a, k); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

double hermiticity_defect(const SparseComplex& a) {
  return max_abs(SparseComplex(a - SparseComplex(a.adjoint())));
}

SymmetryReport verify_symmetry(const OperatorMatrix& h, const SpinOperators& ops, double tol) {
  const auto dim = h.dimension();
  for (const auto* op : {&ops.sx, &ops.sy, &ops.sz}) {
    if (op->dimension() != dim || h.matrix.cols() != dim) {
      throw InvalidArgument("verify_symmetry: dimension mismatch");
    }
  }
  const Complex i(0.0, 1.0);
  SymmetryReport r;
  r.comm_h_sx = max_abs(commutator(h.matrix, ops.sx.matrix));
  r.comm_h_sy = max_abs(commutator(h.matrix, ops.sy.matrix));
  r.comm_h_sz = max_abs(commutator(h.matrix, ops.sz.matrix));
  const SparseComplex xy = commutator(ops.sx.matrix, ops.sy.matrix);
  r.noncommutation_witness = max_abs(xy);
  r.algebra_closure = std::max(
      {max_abs(SparseComplex(xy - i * ops.sz.matrix)),
       max_abs(SparseComplex(commutator(ops.sy.matrix, ops.sz.matrix) - i * ops.sx.matrix)),
       max_abs(SparseComplex(commutator(ops.sz.matrix, ops.sx.matrix) - i * ops.sy.matrix))});
  r.pass = r.comm_h_sx <= tol && r.comm_h_sy <= tol && r.comm_h_sz <= tol &&
           r.noncommutation_witness > 0.0;
  return r;
}

}  // namespace naeth
