#include <cmath>

#include "naeth/errors.hpp"
#include "naeth/tensor.hpp"

namespace naeth {

namespace {

SparseComplex commutator(const SparseComplex& a, const SparseComplex& b) {
  SparseComplex ab = a * b;
  SparseComplex ba = b * a;
  SparseComplex c = ab - ba;
  c.prune(Complex(0.0), 1e-300);
  return c;
}

void check_site(int site, int n_sites) {
  if (site < 0 || site >= n_sites)
    throw InvalidArgument("build_tensor: site " + std::to_string(site) + " outside chain of " +
                          std::to_string(n_sites));
}

OperatorMatrix wrap(int n_sites, SparseComplex m) {
  m.makeCompressed();
  OperatorMatrix op;
  op.n_sites = n_sites;
  op.matrix = std::move(m);
  op.hermitian = hermiticity_defect(op.matrix) == 0.0;
  return op;
}

double ladder_factor(int k, int q, int dq) {
  return std::sqrt(static_cast<double>(k * (k + 1) - q * (q + dq)));
}

}  // namespace

TensorKind tensor_kind_from_string(const std::string& s) {
  if (s == "identity") return TensorKind::identity;
  if (s == "dipole" || s == "dipole_k1") return TensorKind::dipole;
  if (s == "quadrupole" || s == "quadrupole_k2") return TensorKind::quadrupole;
  if (s == "scalar" || s == "scalar_k0") return TensorKind::scalar;
  throw InvalidArgument("unknown operator kind '" + s + "'");
}

std::string to_string(TensorKind kind) {
  switch (kind) {
    case TensorKind::identity: return "identity";
    case TensorKind::dipole: return "dipole";
    case TensorKind::quadrupole: return "quadrupole";
    case TensorKind::scalar: return "scalar";
  }
  return "?";
}

const OperatorMatrix& SphericalTensorFamily::component(int q) const {
  auto it = components.find(q);
  if (it == components.end())
    throw InvalidArgument("tensor component q=" + std::to_string(q) + " outside rank " +
                          std::to_string(rank));
  return it->second;
}

SphericalTensorFamily build_tensor(TensorKind kind, const std::vector<int>& sites, int n_sites) {
  if (n_sites < 1) throw InvalidArgument("build_tensor: need at least one site");
  SphericalTensorFamily t;
  t.n_sites = n_sites;
  auto need_sites = [&](std::size_t n) {
    if (sites.size() != n)
      throw InvalidArgument("build_tensor: " + to_string(kind) + " needs " + std::to_string(n) +
                            " site(s), got " + std::to_string(sites.size()));
    for (int s : sites) check_site(s, n_sites);
  };

  switch (kind) {
    case TensorKind::identity: {
      need_sites(0);
      t.rank = 0;
      t.locality = 0;
      t.components[0] = wrap(n_sites, identity_operator(n_sites));
      t.description = "identity";
      break;
    }
    case TensorKind::dipole: {
      need_sites(1);
      const int j = sites[0];
      t.rank = 1;
      t.locality = 1;
      const double r = 1.0 / std::sqrt(2.0);
      t.components[0] = wrap(n_sites, site_sz(n_sites, j));
      t.components[1] = wrap(n_sites, SparseComplex(-r * site_splus(n_sites, j)));
      t.components[-1] = wrap(n_sites, SparseComplex(r * site_sminus(n_sites, j)));
      t.description = "dipole s_" + std::to_string(j);
      break;
    }
    case TensorKind::quadrupole: {
      need_sites(2);
      const int i = sites[0], j = sites[1];
      if (i == j) throw InvalidArgument("build_tensor: quadrupole needs two distinct sites");
      t.rank = 2;
      t.locality = std::abs(i - j) + 1;
      SparseComplex t0 = 3.0 * (site_sz(n_sites, i) * site_sz(n_sites, j));
      t0 -= site_dot(n_sites, i, j);
      const SparseComplex sp = site_splus(n_sites, i) + site_splus(n_sites, j);
      const SparseComplex sm = site_sminus(n_sites, i) + site_sminus(n_sites, j);
      t.components[0] = wrap(n_sites, t0);
      for (int q = 0; q < 2; ++q) {
        SparseComplex up = commutator(sp, t.components[q].matrix) / ladder_factor(2, q, 1);
        t.components[q + 1] = wrap(n_sites, up);
        SparseComplex down = commutator(sm, t.components[-q].matrix) / ladder_factor(2, -q, -1);
        t.components[-q - 1] = wrap(n_sites, down);
      }
      t.description = "quadrupole s_" + std::to_string(i) + " s_" + std::to_string(j);
      break;
    }
    case TensorKind::scalar: {
      need_sites(2);
      const int i = sites[0], j = sites[1];
      if (i == j) throw InvalidArgument("build_tensor: scalar needs two distinct sites");
      t.rank = 0;
      t.locality = std::abs(i - j) + 1;
      t.components[0] = wrap(n_sites, SparseComplex(-site_dot(n_sites, i, j)));
      t.description = "scalar -s_" + std::to_string(i) + ".s_" + std::to_string(j);
      break;
    }
  }
  return t;
}

TensorAlgebraReport check_tensor_algebra(const SphericalTensorFamily& t, const SpinOperators& ops) {
  if (ops.sz.n_sites != t.n_sites)
    throw InvalidArgument("check_tensor_algebra: size mismatch");
  TensorAlgebraReport r;
  const int k = t.rank;
  for (int q = -k; q <= k; ++q) {
    const SparseComplex& tq = t.component(q).matrix;
    SparseComplex d = commutator(ops.sz.matrix, tq) - static_cast<double>(q) * tq;
    r.sz_commutator = std::max(r.sz_commutator, max_abs(d));

    for (int dq : {1, -1}) {
      const SparseComplex& ladder = dq > 0 ? ops.splus.matrix : ops.sminus.matrix;
      SparseComplex c = commutator(ladder, tq);
      if (std::abs(q + dq) <= k) c -= ladder_factor(k, q, dq) * t.component(q + dq).matrix;
      r.ladder_commutator = std::max(r.ladder_commutator, max_abs(c));
    }

    SparseComplex adj = tq.adjoint();
    SparseComplex h = adj - ((q % 2 == 0) ? 1.0 : -1.0) * t.component(-q).matrix;
    r.hermiticity = std::max(r.hermiticity, max_abs(h));
  }
  return r;
}

}  // namespace naeth
