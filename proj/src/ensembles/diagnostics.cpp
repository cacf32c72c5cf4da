#include <cmath>

#include "naeth/ensembles.hpp"
#include "naeth/errors.hpp"

namespace naeth {

namespace {

/// (<A>, <A^2> - |<A>|^2) for a normalized state.
std::pair<Complex, double> mean_and_variance(const SparseComplex& a, const Eigen::VectorXcd& psi) {
  const Eigen::VectorXcd apsi = a * psi;
  const Complex mean = psi.dot(apsi);
  return {mean, apsi.squaredNorm() - std::norm(mean)};
}

std::optional<LinearFit> log_log(const std::vector<double>& n, const std::vector<double>& v) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(v[i] > 1e-12)) return std::nullopt;
    x.push_back(std::log(n[i]));
    y.push_back(std::log(v[i]));
  }
  if (x.size() < 2) return std::nullopt;
  return least_squares(x, y);
}

}  // namespace

AmcReport amc_check(const Eigen::VectorXcd& psi, const OperatorMatrix& h, const SpinOperators& ops) {
  if (psi.size() != h.dimension() || ops.sz.dimension() != h.dimension())
    throw InvalidArgument("amc_check: dimension mismatch");
  AmcReport r;
  r.n_sites = h.n_sites;
  const auto [e, ve] = mean_and_variance(h.matrix, psi);
  const auto [mz, vz] = mean_and_variance(ops.sz.matrix, psi);
  r.energy = e.real();
  r.magnetization = mz.real();
  r.var_h = ve;
  r.var_sz = vz;
  r.var_sx = mean_and_variance(ops.sx.matrix, psi).second;
  r.var_sy = mean_and_variance(ops.sy.matrix, psi).second;
  return r;
}

AmcScaling amc_scaling(const std::vector<AmcReport>& reports) {
  std::vector<double> n, vh, vz, vx, vy;
  for (const auto& r : reports) {
    n.push_back(r.n_sites);
    vh.push_back(r.var_h);
    vz.push_back(r.var_sz);
    vx.push_back(r.var_sx);
    vy.push_back(r.var_sy);
  }
  AmcScaling s;
  s.var_h = log_log(n, vh);
  s.var_sz = log_log(n, vz);
  s.var_sx = log_log(n, vx);
  s.var_sy = log_log(n, vy);
  return s;
}

EnsembleDistribution diagonal_distribution(const StateCoefficients& state, const SpectrumTable& table) {
  if (state.amplitudes.size() != table.size())
    throw InvalidArgument("diagonal_distribution: state/table mismatch");
  EnsembleDistribution d;
  d.n_sites = table.n_sites();
  for (const auto& mu : table.multiplets())
    for (int i = 0; i <= mu.spin.twice(); ++i) {
      const double p = std::norm(state.amplitudes[mu.label](i));
      if (p == 0.0) continue;
      d.energy.push_back(mu.energy);
      d.m.push_back(0.5 * (2 * i - mu.spin.twice()));
      d.spin.push_back(mu.spin.value());
      d.p.push_back(p);
    }
  return d;
}

EnsembleDistribution nats_distribution(const SpectrumTable& table, const NatsParams& params) {
  const double log_z = nats_moments(table, params.beta, params.nu).log_z;
  EnsembleDistribution d;
  d.n_sites = table.n_sites();
  for (const auto& mu : table.multiplets())
    for (int tm = -mu.spin.twice(); tm <= mu.spin.twice(); tm += 2) {
      d.energy.push_back(mu.energy);
      d.m.push_back(0.5 * tm);
      d.spin.push_back(mu.spin.value());
      d.p.push_back(std::exp(-params.beta * mu.energy + params.nu * 0.5 * tm - log_z));
    }
  return d;
}

const MomentEntry* MomentReport::find(int a, int b, int c) const {
  for (const auto& m : moments)
    if (m.order == std::array<int, 3>{a, b, c}) return &m;
  return nullptr;
}

MomentReport moment_check(const EnsembleDistribution& dist, int max_order) {
  if (max_order < 0) throw InvalidArgument("moment_check: negative order");
  MomentReport r;
  r.n_sites = dist.n_sites;
  double norm = 0.0;
  for (std::size_t i = 0; i < dist.p.size(); ++i) {
    norm += dist.p[i];
    r.energy += dist.p[i] * dist.energy[i];
    r.magnetization += dist.p[i] * dist.m[i];
  }
  r.energy /= norm;
  r.magnetization /= norm;
  for (int a = 0; a <= max_order; ++a)
    for (int b = 0; a + b <= max_order; ++b)
      for (int c = 0; a + b + c <= max_order; ++c) {
        double v = 0.0;
        for (std::size_t i = 0; i < dist.p.size(); ++i)
          v += dist.p[i] * std::pow(dist.energy[i] - r.energy, a) *
               std::pow(dist.m[i] - r.magnetization, b) *
               std::pow(dist.spin[i] - r.magnetization, c);
        r.moments.push_back({{a, b, c}, v / norm});
      }
  return r;
}

std::vector<MomentScalingEntry> moment_scaling(const std::vector<MomentReport>& reports,
                                               double zero_floor) {
  std::vector<MomentScalingEntry> out;
  if (reports.empty()) return out;
  for (const auto& first : reports.front().moments) {
    const auto [a, b, c] = first.order;
    if (a + b + c == 0) continue;  // normalization, not a moment bound
    MomentScalingEntry e;
    e.order = first.order;
    e.bound = a + b + c - 1;
    std::vector<double> x, y;
    for (const auto& r : reports) {
      const auto* m = r.find(a, b, c);
      if (!m) throw InvalidArgument("moment_scaling: reports have different orders");
      const double n = r.n_sites;
      if (std::abs(m->value) <= zero_floor * std::pow(n, a + b + c)) {
        ++e.excluded_zero;
        continue;
      }
      x.push_back(std::log(n));
      y.push_back(std::log(std::abs(m->value)));
    }
    if (x.size() >= 2) {
      e.fit = least_squares(x, y);
      e.flagged = e.fit->slope > e.bound + 2.0 * e.fit->slope_stderr;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace naeth
