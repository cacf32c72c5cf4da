#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "naeth/clebsch_gordan.hpp"
#include "naeth/errors.hpp"
#include "naeth/linalg.hpp"
#include "naeth/tensor.hpp"

namespace naeth {

namespace {

struct Probe {
  int twice_m = 0, twice_m_prime = 0, q = 0;
  double cg = 0.0;
};

bool triangle(HalfInteger s, HalfInteger sp, int k) {
  const int tk = 2 * k;
  return std::abs(s.twice() - sp.twice()) <= tk && tk <= s.twice() + sp.twice();
}

/// Probes (m', q) whose |CG| exceeds threshold * max |CG|. Empty when every
/// coefficient vanishes.
std::vector<Probe> active_probes(HalfInteger s, HalfInteger sp, int k, double threshold) {
  std::vector<Probe> all;
  double largest = 0.0;
  const HalfInteger kk = HalfInteger::from_int(k);
  for (int q = -k; q <= k; ++q) {
    const HalfInteger qq = HalfInteger::from_int(q);
    for (int tmp = -sp.twice(); tmp <= sp.twice(); tmp += 2) {
      const HalfInteger mp = HalfInteger::from_twice(tmp);
      const HalfInteger m = mp + qq;
      if (std::abs(m.twice()) > s.twice()) continue;
      const double c = cg_value(s, m, sp, mp, kk, qq);
      all.push_back({m.twice(), tmp, q, c});
      largest = std::max(largest, std::abs(c));
    }
  }
  std::vector<Probe> active;
  if (largest == 0.0) return active;
  for (const Probe& p : all)
    if (std::abs(p.cg) > threshold * largest) active.push_back(p);
  return active;
}

struct TensorSectors {
  std::map<int, SectorBlocks> by_q;
  TensorSectors(const SphericalTensorFamily& t, const SpectrumTable& table) {
    if (t.n_sites != table.n_sites())
      throw InvalidArgument("reduced elements: operator acts on " + std::to_string(t.n_sites) +
                            " sites, spectrum has " + std::to_string(table.n_sites()));
    for (const auto& [q, op] : t.components) by_q.emplace(q, SectorBlocks(op, table.basis()));
  }
  const SparseReal* block(const Probe& p) const {
    return by_q.at(p.q).find(p.twice_m, p.twice_m_prime);
  }
};

/// <alpha, m| T_q |beta, m'> for the given columns, as rows x cols.
Eigen::MatrixXd probe_elements(const TensorSectors& ts, const Probe& p, const Eigen::MatrixXd& w_row,
                               const Eigen::MatrixXd& w_col) {
  const SparseReal* t = ts.block(p);
  if (t == nullptr) return Eigen::MatrixXd::Zero(w_row.cols(), w_col.cols());
  Eigen::MatrixXd x = (*t) * w_col;
  return w_row.transpose() * x;
}

const Eigen::MatrixXd& vectors_at(const SpinBlock& b, int twice_m) {
  return b.vectors.at((twice_m + b.spin.twice()) / 2);
}

/// Aggregates value/CG ratios into a mean and relative spread.
struct RatioAccumulator {
  Eigen::MatrixXd sum, lo, hi;
  int n = 0;
  void add(const Eigen::MatrixXd& ratio) {
    if (n == 0) {
      sum = ratio;
      lo = ratio;
      hi = ratio;
    } else {
      sum += ratio;
      lo = lo.cwiseMin(ratio);
      hi = hi.cwiseMax(ratio);
    }
    ++n;
  }
  void finish(Eigen::MatrixXd& value, Eigen::MatrixXd& spread) const {
    value = sum / static_cast<double>(n);
    spread.resize(value.rows(), value.cols());
    for (Eigen::Index i = 0; i < value.rows(); ++i)
      for (Eigen::Index j = 0; j < value.cols(); ++j) {
        const double v = value(i, j);
        const double dev = std::max(hi(i, j) - v, v - lo(i, j));
        spread(i, j) = dev / std::max(std::abs(v), kSpreadFloor);
      }
  }
};

ReducedPairBlock pair_block(const TensorSectors& ts, const SpectrumTable& table, int k, int b,
                            int bp, double threshold, const std::vector<int>* rows,
                            const std::vector<int>* cols) {
  const SpinBlock& rb = table.blocks()[b];
  const SpinBlock& cb = table.blocks()[bp];
  ReducedPairBlock out;
  out.row_block = b;
  out.col_block = bp;
  const auto probes = active_probes(rb.spin, cb.spin, k, threshold);
  const Eigen::Index nr = rows ? static_cast<Eigen::Index>(rows->size()) : rb.count();
  const Eigen::Index nc = cols ? static_cast<Eigen::Index>(cols->size()) : cb.count();
  if (probes.empty()) {
    out.defined = false;
    out.value = Eigen::MatrixXd::Zero(nr, nc);
    out.spread = Eigen::MatrixXd::Zero(nr, nc);
    return out;
  }
  auto select = [](const Eigen::MatrixXd& w, const std::vector<int>* idx) -> Eigen::MatrixXd {
    if (!idx) return w;
    Eigen::MatrixXd s(w.rows(), static_cast<Eigen::Index>(idx->size()));
    for (std::size_t i = 0; i < idx->size(); ++i) s.col(static_cast<Eigen::Index>(i)) = w.col((*idx)[i]);
    return s;
  };
  RatioAccumulator acc;
  for (const Probe& p : probes) {
    const Eigen::MatrixXd wr = select(vectors_at(rb, p.twice_m), rows);
    const Eigen::MatrixXd wc = select(vectors_at(cb, p.twice_m_prime), cols);
    acc.add(probe_elements(ts, p, wr, wc) / p.cg);
  }
  out.probes = acc.n;
  acc.finish(out.value, out.spread);
  return out;
}

template <class F>
void parallel_for(int n, int threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ReducedElementTable::ReducedElementTable(int rank, const SpectrumTable& table,
                                         std::vector<ReducedPairBlock> blocks)
    : rank_(rank), table_(&table), blocks_(std::move(blocks)) {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    index_[{blocks_[i].row_block, blocks_[i].col_block}] = i;
}

const ReducedPairBlock* ReducedElementTable::find(int row_block, int col_block) const {
  auto it = index_.find({row_block, col_block});
  return it == index_.end() ? nullptr : &blocks_[it->second];
}

std::optional<double> ReducedElementTable::value(int alpha, int beta) const {
  const auto& a = table_->multiplet(alpha);
  const auto& b = table_->multiplet(beta);
  const auto* p = find(a.block, b.block);
  if (!p || !p->defined) return std::nullopt;
  return p->value(a.column, b.column);
}

std::optional<double> ReducedElementTable::spread(int alpha, int beta) const {
  const auto& a = table_->multiplet(alpha);
  const auto& b = table_->multiplet(beta);
  const auto* p = find(a.block, b.block);
  if (!p || !p->defined) return std::nullopt;
  return p->spread(a.column, b.column);
}

double ReducedElementTable::max_spread() const {
  double m = 0.0;
  for (const auto& b : blocks_)
    if (b.defined && b.spread.size() > 0) m = std::max(m, b.spread.maxCoeff());
  return m;
}

ReducedElementTable reduced_elements(const SphericalTensorFamily& t, const SpectrumTable& table,
                                     const ReducedOptions& options) {
  const TensorSectors ts(t, table);
  std::vector<std::pair<int, int>> pairs;
  const int nb = static_cast<int>(table.blocks().size());
  for (int b = 0; b < nb; ++b)
    for (int bp = 0; bp < nb; ++bp)
      if (triangle(table.blocks()[b].spin, table.blocks()[bp].spin, t.rank)) pairs.emplace_back(b, bp);
  std::vector<ReducedPairBlock> blocks(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), options.threads, [&](int i) {
    blocks[i] = pair_block(ts, table, t.rank, pairs[i].first, pairs[i].second,
                           options.cg_threshold, nullptr, nullptr);
  });
  return ReducedElementTable(t.rank, table, std::move(blocks));
}

double DiagonalReducedElements::max_spread() const {
  double m = 0.0;
  for (std::size_t i = 0; i < value.size(); ++i)
    if (value[i]) m = std::max(m, spread[i]);
  return m;
}

DiagonalReducedElements diagonal_reduced_elements(const SphericalTensorFamily& t,
                                                  const SpectrumTable& table,
                                                  const ReducedOptions& options) {
  const TensorSectors ts(t, table);
  DiagonalReducedElements out;
  out.rank = t.rank;
  out.value.assign(table.size(), std::nullopt);
  out.spread.assign(table.size(), 0.0);
  const int nb = static_cast<int>(table.blocks().size());
  parallel_for(nb, options.threads, [&](int b) {
    const SpinBlock& block = table.blocks()[b];
    if (!triangle(block.spin, block.spin, t.rank)) return;
    const auto probes = active_probes(block.spin, block.spin, t.rank, options.cg_threshold);
    if (probes.empty()) return;
    RatioAccumulator acc;
    for (const Probe& p : probes) {
      const Eigen::MatrixXd& wr = vectors_at(block, p.twice_m);
      const Eigen::MatrixXd& wc = vectors_at(block, p.twice_m_prime);
      Eigen::MatrixXd diag;
      if (const SparseReal* tb = ts.block(p)) {
        Eigen::MatrixXd x = (*tb) * wc;
        diag = wr.cwiseProduct(x).colwise().sum().transpose();
      } else {
        diag = Eigen::MatrixXd::Zero(block.count(), 1);
      }
      acc.add(diag / p.cg);
    }
    Eigen::MatrixXd value, spread;
    acc.finish(value, spread);
    for (int c = 0; c < block.count(); ++c) {
      out.value[block.first_label + c] = value(c, 0);
      out.spread[block.first_label + c] = spread(c, 0);
    }
  });
  return out;
}

std::optional<double> reduced_element_pair(const SphericalTensorFamily& t,
                                           const SpectrumTable& table, int alpha, int beta,
                                           double cg_threshold) {
  const auto& a = table.multiplet(alpha);
  const auto& b = table.multiplet(beta);
  if (!triangle(a.spin, b.spin, t.rank)) return std::nullopt;
  const TensorSectors ts(t, table);
  const std::vector<int> rows{a.column}, cols{b.column};
  auto block = pair_block(ts, table, t.rank, a.block, b.block, cg_threshold, &rows, &cols);
  if (!block.defined) return std::nullopt;
  return block.value(0, 0);
}

double max_selection_rule_violation(const SphericalTensorFamily& t, const SpectrumTable& table) {
  const TensorSectors ts(t, table);
  double worst = 0.0;
  const auto& blocks = table.blocks();
  for (const auto& rb : blocks)
    for (const auto& cb : blocks) {
      const bool allowed = triangle(rb.spin, cb.spin, t.rank);
      for (int q = -t.rank; q <= t.rank; ++q)
        for (int tmp = -cb.spin.twice(); tmp <= cb.spin.twice(); tmp += 2)
          for (int tm = -rb.spin.twice(); tm <= rb.spin.twice(); tm += 2) {
            // Only triangle-forbidden pairs (with m = m' + q) and allowed
            // pairs with m != m' + q can have structurally unforced entries.
            if (allowed && tm == tmp + 2 * q) continue;
            Probe p{tm, tmp, q, 1.0};
            const SparseReal* tb = ts.by_q.at(q).find(tm, tmp);
            if (!tb) continue;
            Eigen::MatrixXd me = probe_elements(ts, p, vectors_at(rb, tm), vectors_at(cb, tmp));
            if (me.size() > 0) worst = std::max(worst, me.cwiseAbs().maxCoeff());
          }
    }
  return worst;
}

}  // namespace naeth
