#pragma once

// Test-only oracle: naive diagonalization of the full 2^N Hamiltonian, with
// (E, s) eigenspaces resolved by diagonalizing S^2 inside each energy cluster.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "naeth/linalg.hpp"
#include "naeth/model.hpp"

namespace naeth::oracle {

inline Eigen::MatrixXd dense_real(const OperatorMatrix& op) {
  return Eigen::MatrixXcd(op.matrix).real();
}

struct DenseEigenspace {
  double energy;
  double spin;              // s from S^2 = s(s+1)
  Eigen::MatrixXd vectors;  // orthonormal columns spanning the eigenspace
};

inline double spin_from_casimir(double c) { return 0.5 * (std::sqrt(1.0 + 4.0 * c) - 1.0); }

/// Full-space eigenspaces of H split by S^2. `cluster_tol` groups energies.
inline std::vector<DenseEigenspace> dense_eigenspaces(const OperatorMatrix& h,
                                                      const SpinOperators& ops,
                                                      double cluster_tol = 1e-8) {
  const Eigen::MatrixXd hd = dense_real(h);
  const Eigen::MatrixXd s2 = dense_real(ops.s_squared);
  const auto eig = symmetric_eigensolve(hd, "dense oracle");
  std::vector<DenseEigenspace> out;
  const Eigen::Index n = hd.rows();
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && eig.values(end) - eig.values(end - 1) < cluster_tol) ++end;
    const Eigen::MatrixXd v = eig.vectors.middleCols(start, end - start);
    const double energy = eig.values.segment(start, end - start).mean();
    Eigen::MatrixXd proj = v.transpose() * s2 * v;
    proj = 0.5 * (proj + proj.transpose()).eval();
    const auto cas = symmetric_eigensolve(proj, "dense oracle S^2");
    Eigen::Index a = 0;
    while (a < cas.values.size()) {
      Eigen::Index b = a + 1;
      while (b < cas.values.size() && cas.values(b) - cas.values(a) < 0.25) ++b;
      out.push_back({energy, spin_from_casimir(cas.values.segment(a, b - a).mean()),
                     v * cas.vectors.middleCols(a, b - a)});
      a = b;
    }
    start = end;
  }
  return out;
}

}  // namespace naeth::oracle
