#pragma once

// Test-only oracle: Clebsch-Gordan coefficients by explicit angular-momentum
// coupling. The highest-weight state |J, J> is found as the kernel of J_+ in
// the M = J product subspace, then lowered with J_-. Everything is carried in
// the rescaled product basis |j, m) = sqrt((j+m)!/(j-m)!) |j, m>, where
//   J_+ |j, m) = |j, m+1)   and   J_- |j, m) = (j+m)(j-m+1) |j, m-1),
// so every intermediate coefficient is rational. Shares no code with the
// Racah-sum implementation.

#include <gmpxx.h>

#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "naeth/clebsch_gordan.hpp"

namespace naeth::oracle {

class LadderCoupling {
 public:
  LadderCoupling(int twice_j1, int twice_j2) : j1_(twice_j1), j2_(twice_j2) {
    for (int tj = std::abs(j1_ - j2_); tj <= j1_ + j2_; tj += 2) build(tj);
  }

  /// <J, M | j1, m1; j2, M - m1>, all arguments doubled.
  ExactScalar coefficient(int twice_J, int twice_M, int twice_m1) const {
    const int tm2 = twice_M - twice_m1;
    if (std::abs(twice_m1) > j1_ || std::abs(tm2) > j2_) return ExactScalar::zero();
    const auto it = states_.find({twice_J, twice_M});
    if (it == states_.end()) return ExactScalar::zero();
    const auto& st = it->second;
    const mpq_class& y = st.coeffs.at(index(twice_m1));
    if (sgn(y) == 0) return ExactScalar::zero();
    mpq_class sq = y * y * scale(j1_, twice_m1) * scale(j2_, tm2) / st.norm;
    return ExactScalar(sgn(y), sq);
  }

 private:
  struct State {
    std::vector<mpq_class> coeffs;  // indexed by m1, rescaled basis
    mpq_class norm;                 // squared physical norm of the rescaled vector
  };

  static mpz_class fact(int n) {
    mpz_class out;
    mpz_fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n));
    return out;
  }
  // (j+m)!/(j-m)!, doubled arguments.
  static mpq_class scale(int tj, int tm) {
    mpq_class r(fact((tj + tm) / 2), fact((tj - tm) / 2));
    r.canonicalize();
    return r;
  }
  std::size_t index(int twice_m1) const { return static_cast<std::size_t>((twice_m1 + j1_) / 2); }

  void build(int tj) {
    const std::size_t n1 = j1_ + 1;
    // Columns: m1 with m2 = J - m1 valid. Rows: (m1', m2') with m1'+m2' = J+1.
    std::vector<int> cols;
    for (int tm1 = -j1_; tm1 <= j1_; tm1 += 2) {
      if (std::abs(tj - tm1) <= j2_) cols.push_back(tm1);
    }
    std::vector<int> rows;
    for (int tm1 = -j1_; tm1 <= j1_; tm1 += 2) {
      if (std::abs(tj + 2 - tm1) <= j2_) rows.push_back(tm1);
    }
    std::vector<std::vector<mpq_class>> a(rows.size(), std::vector<mpq_class>(cols.size(), 0));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const int tm1 = cols[c], tm2 = tj - tm1;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (tm1 + 2 <= j1_ && rows[r] == tm1 + 2) a[r][c] += 1;  // J1_+ on site 1
        if (tm2 + 2 <= j2_ && rows[r] == tm1) a[r][c] += 1;      // J2_+ on site 2
      }
    }
    const std::vector<mpq_class> kernel = null_vector(a, cols.size());

    State top;
    top.coeffs.assign(n1, 0);
    for (std::size_t c = 0; c < cols.size(); ++c) top.coeffs[index(cols[c])] = kernel[c];
    // Condon-Shortley: <j1 j1; j2 J-j1 | J J> > 0.
    if (sgn(top.coeffs[index(j1_)]) < 0) {
      for (auto& v : top.coeffs) v = -v;
    }
    mpq_class norm = 0;
    for (int tm1 = -j1_; tm1 <= j1_; tm1 += 2) {
      const int tm2 = tj - tm1;
      if (std::abs(tm2) > j2_) continue;
      const mpq_class& y = top.coeffs[index(tm1)];
      norm += y * y * scale(j1_, tm1) * scale(j2_, tm2);
    }
    top.norm = norm;
    states_[{tj, tj}] = top;

    State cur = top;
    for (int tm = tj; tm > -tj; tm -= 2) {
      State next;
      next.coeffs.assign(n1, 0);
      for (int tm1 = -j1_; tm1 <= j1_; tm1 += 2) {
        const int tm2 = tm - tm1;
        if (std::abs(tm2) > j2_) continue;
        const mpq_class& y = cur.coeffs[index(tm1)];
        if (sgn(y) == 0) continue;
        if (tm1 - 2 >= -j1_) {
          next.coeffs[index(tm1 - 2)] += y * ((j1_ + tm1) / 2) * ((j1_ - tm1) / 2 + 1);
        }
        if (tm2 - 2 >= -j2_) {
          next.coeffs[index(tm1)] += y * ((j2_ + tm2) / 2) * ((j2_ - tm2) / 2 + 1);
        }
      }
      // |J, M-1> = J_- |J, M> / sqrt((J+M)(J-M+1)); squared norms multiply.
      next.norm = cur.norm * ((tj + tm) / 2) * ((tj - tm) / 2 + 1);
      states_[{tj, tm - 2}] = next;
      cur = std::move(next);
    }
  }

  // One-dimensional null space of a rational matrix, by Gauss-Jordan.
  static std::vector<mpq_class> null_vector(std::vector<std::vector<mpq_class>> a, std::size_t n) {
    std::vector<int> pivot_col;
    std::size_t row = 0;
    for (std::size_t c = 0; c < n && row < a.size(); ++c) {
      std::size_t p = row;
      while (p < a.size() && sgn(a[p][c]) == 0) ++p;
      if (p == a.size()) continue;
      std::swap(a[p], a[row]);
      const mpq_class inv = 1 / a[row][c];
      for (auto& v : a[row]) v *= inv;
      for (std::size_t r = 0; r < a.size(); ++r) {
        if (r == row || sgn(a[r][c]) == 0) continue;
        const mpq_class f = a[r][c];
        for (std::size_t k = 0; k < n; ++k) a[r][k] -= f * a[row][k];
      }
      pivot_col.push_back(static_cast<int>(c));
      ++row;
    }
    std::vector<bool> is_pivot(n, false);
    for (int c : pivot_col) is_pivot[c] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < n; ++c) {
      if (!is_pivot[c]) free_cols.push_back(c);
    }
    if (free_cols.size() != 1) throw std::logic_error("ladder oracle: kernel is not one-dimensional");
    std::vector<mpq_class> v(n, 0);
    v[free_cols[0]] = 1;
    for (std::size_t r = 0; r < pivot_col.size(); ++r) v[pivot_col[r]] = -a[r][free_cols[0]];
    return v;
  }

  int j1_, j2_;
  std::map<std::pair<int, int>, State> states_;
};

/// <s, m | s', m'; k, q> through a cache of LadderCoupling tables.
class LadderCGOracle {
 public:
  ExactScalar operator()(const CGKey& key) {
    const int s = key.s.twice(), sp = key.s_prime.twice(), k = key.k.twice();
    if (key.m.twice() != key.m_prime.twice() + key.q.twice()) return ExactScalar::zero();
    if ((sp + k - s) % 2 != 0 || s < std::abs(sp - k) || s > sp + k) return ExactScalar::zero();
    auto it = tables_.find({sp, k});
    if (it == tables_.end()) it = tables_.emplace(std::make_pair(sp, k), LadderCoupling(sp, k)).first;
    return it->second.coefficient(s, key.m.twice(), key.m_prime.twice());
  }

 private:
  std::map<std::pair<int, int>, LadderCoupling> tables_;
};

}  // namespace naeth::oracle
