#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <map>
#include <string>
#include <utility>

#include "naeth/basis.hpp"
#include "naeth/model.hpp"

namespace naeth {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// Dense real-symmetric eigendecomposition (LAPACK divide and conquer).
/// Only the lower triangle of `a` is read. `context` is quoted in errors.
SymmetricEigen symmetric_eigensolve(Eigen::MatrixXd a, const std::string& context);

using SparseReal = Eigen::SparseMatrix<double>;

/// A real operator split into S_z-sector blocks. Block (row, col) maps the
/// sector with 2m = col into the sector with 2m = row.
class SectorBlocks {
 public:
  /// Throws InvalidArgument if any entry has a nonzero imaginary part
  /// (above `imag_tol`).
  SectorBlocks(const OperatorMatrix& op, const SzDecomposition& basis, double imag_tol = 1e-14);

  /// nullptr when the block has no nonzero entries.
  const SparseReal* find(int twice_m_row, int twice_m_col) const;

 private:
  std::map<std::pair<int, int>, SparseReal> blocks_;
};

}  // namespace naeth
