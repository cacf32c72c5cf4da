#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "naeth/clebsch_gordan.hpp"
#include "naeth/ensembles.hpp"
#include "naeth/errors.hpp"
#include "naeth/linalg.hpp"

namespace naeth {

namespace {

template <class F>
void for_each_level(const SpectrumTable& table, F&& f) {
  for (const auto& mu : table.multiplets())
    for (int tm = -mu.spin.twice(); tm <= mu.spin.twice(); tm += 2) f(mu, 0.5 * tm);
}

double log_weight_max(const SpectrumTable& table, double beta, double nu) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& mu : table.multiplets()) {
    const double s = mu.spin.value();
    best = std::max(best, -beta * mu.energy + std::abs(nu) * s);
  }
  return best;
}

std::string fmt_residuals(double de, double dm) {
  std::ostringstream os;
  os << "residuals (dE, dM) = (" << de << ", " << dm << ")";
  return os.str();
}

}  // namespace

NatsMoments nats_moments(const SpectrumTable& table, double beta, double nu) {
  const double shift = log_weight_max(table, beta, nu);
  double z = 0.0, se = 0.0, sm = 0.0;
  for_each_level(table, [&](const SpinMultiplet& mu, double m) {
    const double w = std::exp(-beta * mu.energy + nu * m - shift);
    z += w;
    se += w * mu.energy;
    sm += w * m;
  });
  NatsMoments out;
  out.log_z = std::log(z) + shift;
  out.energy = se / z;
  out.magnetization = sm / z;
  double vee = 0.0, vmm = 0.0, vem = 0.0;
  for_each_level(table, [&](const SpinMultiplet& mu, double m) {
    const double w = std::exp(-beta * mu.energy + nu * m - shift) / z;
    const double de = mu.energy - out.energy, dm = m - out.magnetization;
    vee += w * de * de;
    vmm += w * dm * dm;
    vem += w * de * dm;
  });
  out.var_energy = vee;
  out.var_magnetization = vmm;
  out.covariance = vem;
  return out;
}

bool energy_decreasing_in_beta(const SpectrumTable& table, double mu, const std::vector<double>& betas) {
  for (std::size_t i = 1; i < betas.size(); ++i) {
    const double e0 = nats_moments(table, betas[i - 1], betas[i - 1] * mu).energy;
    const double e1 = nats_moments(table, betas[i], betas[i] * mu).energy;
    if (!(e1 < e0)) return false;
  }
  return true;
}

NatsParams solve_nats(const SpectrumTable& table, double target_E, double target_M,
                      const NatsSolveOptions& options) {
  const double e_min = table.min_energy(), e_max = table.max_energy();
  const double half_n = 0.5 * table.n_sites();
  if (!std::isfinite(target_E) || !std::isfinite(target_M))
    throw InvalidArgument("solve_nats: targets must be finite");
  if (!(target_E > e_min && target_E < e_max) || !(std::abs(target_M) < half_n)) {
    std::ostringstream os;
    os << "solve_nats: target (E, M) = (" << target_E << ", " << target_M
       << ") outside the attainable region E in (" << e_min << ", " << e_max << "), |M| < "
       << half_n;
    throw InfeasibleTarget(os.str());
  }
  const double tol_e = options.tolerance * std::max(1.0, std::abs(target_E));
  const double tol_m = options.tolerance * std::max(1.0, std::abs(target_M));

  NatsParams p;
  p.target_E = target_E;
  p.target_M = target_M;

  if (target_M == 0.0) {
    // mu = 0 by symmetry; E(beta) is strictly decreasing.
    auto energy = [&](double b) { return nats_moments(table, b, 0.0); };
    double lo = -1.0, hi = 1.0;
    while (energy(hi).energy > target_E) {
      hi *= 2.0;
      if (hi > options.max_abs_parameter) throw InfeasibleTarget("solve_nats: target E too close to E_min");
    }
    while (energy(lo).energy < target_E) {
      lo *= 2.0;
      if (-lo > options.max_abs_parameter) throw InfeasibleTarget("solve_nats: target E too close to E_max");
    }
    double beta = 0.0;
    for (int it = 1; it <= options.max_iterations; ++it) {
      const auto mo = energy(beta);
      const double f = mo.energy - target_E;
      p.iterations = it;
      if (std::abs(f) <= tol_e) {
        p.beta = beta;
        p.nu = 0.0;
        p.residual_E = f;
        p.residual_M = mo.magnetization - target_M;
        return p;
      }
      if (f > 0.0) lo = beta; else hi = beta;
      double next = mo.var_energy > 0.0 ? beta + f / mo.var_energy : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      beta = next;
    }
    throw SolverError("solve_nats: no convergence in beta; " +
                      fmt_residuals(energy(beta).energy - target_E, 0.0));
  }

  // Convex dual: F(beta, nu) = log Z + beta E* - nu M*, gradient
  // (E* - <E>, <m> - M*), Hessian = covariance of (-E, m).
  double beta = 0.0, nu = 0.0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const auto mo = nats_moments(table, beta, nu);
    const double ge = target_E - mo.energy, gm = mo.magnetization - target_M;
    p.iterations = it;
    if (std::abs(ge) <= tol_e && std::abs(gm) <= tol_m) {
      p.beta = beta;
      p.nu = nu;
      p.residual_E = -ge;
      p.residual_M = gm;
      return p;
    }
    Eigen::Matrix2d hess;
    hess << mo.var_energy, -mo.covariance, -mo.covariance, mo.var_magnetization;
    const Eigen::Vector2d grad(ge, gm);
    Eigen::Vector2d step = -hess.ldlt().solve(grad);
    if (!step.allFinite() || grad.dot(step) >= 0.0) step = -grad;
    // Armijo on F; near the optimum F is flat to rounding, so a step that
    // shrinks the gradient is accepted as well.
    const double f0 = mo.log_z + beta * target_E - nu * target_M;
    const double g0 = grad.norm();
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const double b = beta + t * step(0), n = nu + t * step(1);
      const auto trial = nats_moments(table, b, n);
      const double f1 = trial.log_z + b * target_E - n * target_M;
      const double g1 = std::hypot(target_E - trial.energy, trial.magnetization - target_M);
      if (f1 <= f0 + 1e-4 * t * grad.dot(step) || g1 < (1.0 - 1e-4 * t) * g0) break;
    }
    beta += t * step(0);
    nu += t * step(1);
    if (std::abs(beta) > options.max_abs_parameter || std::abs(nu) > options.max_abs_parameter)
      throw InfeasibleTarget("solve_nats: parameters diverge; target (E, M) not attainable; " +
                             fmt_residuals(-ge, gm));
  }
  const auto mo = nats_moments(table, beta, nu);
  throw SolverError("solve_nats: no convergence after " + std::to_string(options.max_iterations) +
                    " iterations; " +
                    fmt_residuals(mo.energy - target_E, mo.magnetization - target_M));
}

double thermal_average(const DiagonalReducedElements& r, int q, const SpectrumTable& table,
                       const NatsParams& params) {
  if (r.value.size() != table.size())
    throw InvalidArgument("thermal_average: reduced elements belong to a different spectrum");
  if (std::abs(q) > r.rank) throw InvalidArgument("thermal_average: |q| exceeds the rank");
  if (q != 0) return 0.0;
  const double shift = log_weight_max(table, params.beta, params.nu);
  const HalfInteger k = HalfInteger::from_int(r.rank), zero;
  std::map<std::pair<int, int>, double> cg_cache;
  double z = 0.0, sum = 0.0;
  for (const auto& mu : table.multiplets()) {
    const auto& value = r.value[mu.label];
    const bool allowed = 2 * r.rank <= 2 * mu.spin.twice();
    if (allowed && !value)
      throw InvalidArgument("thermal_average: missing diagonal element for multiplet " +
                            std::to_string(mu.label));
    for (int tm = -mu.spin.twice(); tm <= mu.spin.twice(); tm += 2) {
      const double w = std::exp(-params.beta * mu.energy + params.nu * 0.5 * tm - shift);
      z += w;
      if (!allowed) continue;
      auto [it, fresh] = cg_cache.try_emplace({mu.spin.twice(), tm}, 0.0);
      if (fresh) {
        const auto m = HalfInteger::from_twice(tm);
        it->second = cg_exact(CGKey{mu.spin, m, mu.spin, m, k, zero}).to_double();
      }
      sum += w * it->second * *value;
    }
  }
  return sum / z;
}

Complex thermal_trace_direct(const OperatorMatrix& op, const OperatorMatrix& h,
                             const SpinOperators& ops, const NatsParams& params, int max_sites) {
  const int n = h.n_sites;
  if (n > max_sites)
    throw ResourceError("thermal_trace_direct: N = " + std::to_string(n) + " exceeds " +
                        std::to_string(max_sites));
  if (op.n_sites != n || ops.sz.n_sites != n)
    throw InvalidArgument("thermal_trace_direct: size mismatch");
  const SparseComplex a = -params.beta * h.matrix + params.nu * ops.sz.matrix;
  Eigen::MatrixXd dense = Eigen::MatrixXd(Eigen::MatrixXcd(a).real());
  const auto eig = symmetric_eigensolve(std::move(dense), "thermal density matrix");
  const double top = eig.values.maxCoeff();
  const Eigen::VectorXd w = (eig.values.array() - top).exp().matrix();
  const Eigen::MatrixXd rho = eig.vectors * (w / w.sum()).asDiagonal() * eig.vectors.transpose();
  Complex tr = 0.0;
  for (int c = 0; c < op.matrix.outerSize(); ++c)
    for (SparseComplex::InnerIterator it(op.matrix, c); it; ++it) tr += it.value() * rho(it.col(), it.row());
  return tr;
}

}  // namespace naeth
