#include "naeth/linalg.hpp"

#include <lapacke.h>

#include <bit>
#include <cmath>
#include <vector>

#include "naeth/errors.hpp"

namespace naeth {

SymmetricEigen symmetric_eigensolve(Eigen::MatrixXd a, const std::string& context) {
  if (a.rows() != a.cols()) throw InvalidArgument("symmetric_eigensolve: matrix not square");
  const auto n = static_cast<lapack_int>(a.rows());
  SymmetricEigen out;
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, out.values.data());
  if (info != 0) {
    throw SolverError("eigensolver failed (info=" + std::to_string(info) + ") in " + context);
  }
  out.vectors = std::move(a);
  return out;
}

SectorBlocks::SectorBlocks(const OperatorMatrix& op, const SzDecomposition& basis,
                           double imag_tol) {
  if (op.n_sites != basis.n_sites()) throw InvalidArgument("SectorBlocks: n_sites mismatch");
  const int n = basis.n_sites();
  std::map<std::pair<int, int>, std::vector<Eigen::Triplet<double>>> triplets;
  const auto& m = op.matrix;
  for (int col = 0; col < m.outerSize(); ++col) {
    const auto cstate = static_cast<std::uint32_t>(col);
    const int col_up = std::popcount(cstate);
    const auto& csec = basis.by_n_up(col_up);
    const auto cidx = static_cast<Eigen::Index>(csec.index_of(cstate));
    for (SparseComplex::InnerIterator it(m, col); it; ++it) {
      if (std::abs(it.value().imag()) > imag_tol) {
        throw InvalidArgument("SectorBlocks: operator has imaginary entries");
      }
      if (it.value().real() == 0.0) continue;
      const auto rstate = static_cast<std::uint32_t>(it.row());
      const int row_up = std::popcount(rstate);
      const auto ridx = static_cast<Eigen::Index>(basis.by_n_up(row_up).index_of(rstate));
      triplets[{2 * row_up - n, 2 * col_up - n}].emplace_back(ridx, cidx, it.value().real());
    }
  }
  for (auto& [key, t] : triplets) {
    const auto rows = static_cast<Eigen::Index>(basis.by_twice_m(key.first).size());
    const auto cols = static_cast<Eigen::Index>(basis.by_twice_m(key.second).size());
    SparseReal b(rows, cols);
    b.setFromTriplets(t.begin(), t.end());
    b.makeCompressed();
    blocks_.emplace(key, std::move(b));
  }
}

const SparseReal* SectorBlocks::find(int twice_m_row, int twice_m_col) const {
  const auto it = blocks_.find({twice_m_row, twice_m_col});
  return it == blocks_.end() ? nullptr : &it->second;
}

}  // namespace naeth
