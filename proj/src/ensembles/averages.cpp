#include <cmath>

#include "naeth/clebsch_gordan.hpp"
#include "naeth/ensembles.hpp"
#include "naeth/errors.hpp"

namespace naeth {

namespace {

void check_state(const StateCoefficients& state, const SpectrumTable& table) {
  if (state.n_sites != table.n_sites() || state.amplitudes.size() != table.size() ||
      state.model_spec_hash != table.model_spec_hash())
    throw InvalidArgument("state was built on a different spectrum table");
  for (const auto& mu : table.multiplets())
    if (state.amplitudes[mu.label].size() != mu.spin.twice() + 1)
      throw InvalidArgument("state amplitudes do not match the multiplet structure");
}

bool has_weight(const StateCoefficients& s, int label) { return !s.amplitudes[label].isZero(0.0); }

}  // namespace

Complex time_average(const SphericalTensorFamily& t, int q, const StateCoefficients& state,
                     const SpectrumTable& table, const DiagonalReducedElements& diag, double tol) {
  check_state(state, table);
  if (diag.value.size() != table.size() || diag.rank != t.rank)
    throw InvalidArgument("time_average: reduced elements do not match the operator/spectrum");
  if (std::abs(q) > t.rank) throw InvalidArgument("time_average: |q| exceeds the rank");
  const HalfInteger k = HalfInteger::from_int(t.rank), qq = HalfInteger::from_int(q);
  Complex total = 0.0;
  for (const auto& group : energy_classes(table, tol)) {
    for (int alpha : group) {
      if (!has_weight(state, alpha)) continue;
      for (int beta : group) {
        if (!has_weight(state, beta)) continue;
        std::optional<double> r =
            alpha == beta ? diag.value[alpha] : reduced_element_pair(t, table, alpha, beta);
        if (!r) continue;
        const auto& a = table.multiplet(alpha);
        const auto& b = table.multiplet(beta);
        Complex sum = 0.0;
        for (int tmp = -b.spin.twice(); tmp <= b.spin.twice(); tmp += 2) {
          const HalfInteger mp = HalfInteger::from_twice(tmp);
          const HalfInteger m = mp + qq;
          if (std::abs(m.twice()) > a.spin.twice()) continue;
          const Complex ca = state.at(alpha, m), cb = state.at(beta, mp);
          if (ca == 0.0 || cb == 0.0) continue;
          sum += std::conj(ca) * cb * cg_value(a.spin, m, b.spin, mp, k, qq);
        }
        total += sum * *r;
      }
    }
  }
  return total;
}

Complex time_average_dephased(const OperatorMatrix& tq, const StateCoefficients& state,
                              const SpectrumTable& table, double tol) {
  check_state(state, table);
  if (tq.n_sites != table.n_sites()) throw InvalidArgument("time_average_dephased: size mismatch");
  Complex total = 0.0;
  for (const auto& group : energy_classes(table, tol)) {
    auto projected = zero_state(table);
    bool any = false;
    for (int label : group)
      if (has_weight(state, label)) {
        projected.amplitudes[label] = state.amplitudes[label];
        any = true;
      }
    if (!any) continue;
    const Eigen::VectorXcd psi = to_full_vector(projected, table);
    const Eigen::VectorXcd tpsi = tq.matrix * psi;
    total += psi.dot(tpsi);
  }
  return total;
}

}  // namespace naeth
