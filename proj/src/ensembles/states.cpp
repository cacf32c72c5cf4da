#include <cmath>
#include <numbers>
#include <random>

#include "naeth/ensembles.hpp"
#include "naeth/errors.hpp"

namespace naeth {

namespace {

int nearest_in_block(const SpinBlock& b, double energy) {
  int best = 0;
  for (int i = 1; i < b.count(); ++i)
    if (std::abs(b.energies[i] - energy) < std::abs(b.energies[best] - energy)) best = i;
  return b.first_label + best;
}

double target_energy(const StateRequest& r, const SpectrumTable& table) {
  return r.energy_density ? *r.energy_density * table.n_sites() : trace_energy(table);
}

/// Block index of the spin closest to `target` among those accepted by `ok`.
template <class Pred>
int nearest_spin_block(const SpectrumTable& table, double target, Pred ok, const char* what) {
  int best = -1;
  for (int b = 0; b < static_cast<int>(table.blocks().size()); ++b) {
    const auto& blk = table.blocks()[b];
    if (blk.count() == 0 || !ok(blk.spin)) continue;
    if (best < 0 || std::abs(blk.spin.value() - target) <
                        std::abs(table.blocks()[best].spin.value() - target))
      best = b;
  }
  if (best < 0) throw InvalidArgument(std::string("build_state: no multiplet suitable for ") + what);
  return best;
}

bool valid_m_bar(HalfInteger s, HalfInteger mb) {
  const HalfInteger one = HalfInteger::from_int(1);
  if (!valid_projection(s, mb) || !valid_projection(s, mb + one)) return false;
  // m, m+1, -m, -m-1 pairwise distinct
  return mb.twice() != 0 && mb.twice() != -1 && mb.twice() != -2;
}

HalfInteger default_m_bar(HalfInteger s) {
  int t = s.twice() / 2;
  if ((t - s.twice()) % 2 != 0) t -= 1;
  if (t < 1) t = s.is_integer() ? 2 : 1;
  return HalfInteger::from_twice(t);
}

}  // namespace

double StateCoefficients::norm_squared() const {
  double n = 0.0;
  for (const auto& a : amplitudes) n += a.squaredNorm();
  return n;
}

Complex StateCoefficients::at(int label, HalfInteger m) const {
  const auto& a = amplitudes.at(label);
  const int idx = (m.twice() + static_cast<int>(a.size()) - 1) / 2;
  if (idx < 0 || idx >= a.size() || (m.twice() + a.size() - 1) % 2 != 0) return 0.0;
  return a(idx);
}

StateCoefficients zero_state(const SpectrumTable& table) {
  StateCoefficients c;
  c.n_sites = table.n_sites();
  c.model_spec_hash = table.model_spec_hash();
  c.amplitudes.reserve(table.size());
  for (const auto& mu : table.multiplets())
    c.amplitudes.push_back(Eigen::VectorXcd::Zero(mu.spin.twice() + 1));
  return c;
}

StateCoefficients from_full_vector(const Eigen::VectorXcd& psi, const SpectrumTable& table) {
  const int n = table.n_sites();
  if (psi.size() != (Eigen::Index{1} << n))
    throw InvalidArgument("from_full_vector: vector length does not match 2^N");
  auto c = zero_state(table);
  for (const auto& block : table.blocks())
    for (int i = 0; i <= block.spin.twice(); ++i) {
      const int tm = 2 * i - block.spin.twice();
      const auto& sector = table.basis().by_twice_m(tm);
      Eigen::VectorXcd local(sector.size());
      for (std::size_t r = 0; r < sector.size(); ++r) local(r) = psi(sector.state(r));
      const Eigen::VectorXcd proj = block.vectors[i].transpose().cast<Complex>() * local;
      for (int col = 0; col < block.count(); ++col) c.amplitudes[block.first_label + col](i) = proj(col);
    }
  return c;
}

Eigen::VectorXcd to_full_vector(const StateCoefficients& c, const SpectrumTable& table) {
  if (c.amplitudes.size() != table.size()) throw InvalidArgument("to_full_vector: state/table mismatch");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << table.n_sites());
  for (const auto& block : table.blocks())
    for (int i = 0; i <= block.spin.twice(); ++i) {
      Eigen::VectorXcd coeff(block.count());
      for (int col = 0; col < block.count(); ++col) coeff(col) = c.amplitudes[block.first_label + col](i);
      if (coeff.isZero(0.0)) continue;
      const Eigen::VectorXcd local = block.vectors[i].cast<Complex>() * coeff;
      const auto& sector = table.basis().by_twice_m(2 * i - block.spin.twice());
      for (std::size_t r = 0; r < sector.size(); ++r) psi(sector.state(r)) += local(r);
    }
  return psi;
}

StateKind state_kind_from_string(const std::string& s) {
  if (s == "eigenstate") return StateKind::eigenstate;
  if (s == "anomalous_A") return StateKind::anomalous_A;
  if (s == "anomalous_B") return StateKind::anomalous_B;
  if (s == "singlet") return StateKind::singlet;
  if (s == "product") return StateKind::product;
  throw InvalidArgument("unknown state kind '" + s + "'");
}

std::string to_string(StateKind k) {
  switch (k) {
    case StateKind::eigenstate: return "eigenstate";
    case StateKind::anomalous_A: return "anomalous_A";
    case StateKind::anomalous_B: return "anomalous_B";
    case StateKind::singlet: return "singlet";
    case StateKind::product: return "product";
  }
  return "?";
}

Eigen::VectorXcd product_state(const std::vector<double>& thetas) {
  const int n = static_cast<int>(thetas.size());
  if (n < 1 || n > 30) throw InvalidArgument("product_state: bad number of sites");
  Eigen::VectorXcd psi(Eigen::Index{1} << n);
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    double a = 1.0;
    for (int j = 0; j < n; ++j)
      a *= ((x >> j) & 1) ? std::cos(0.5 * thetas[j]) : std::sin(0.5 * thetas[j]);
    psi(x) = a;
  }
  return psi;
}

void apply_heisenberg_gate(Eigen::VectorXcd& psi, int n_sites, int i, int j, double phi) {
  if (i == j || i < 0 || j < 0 || i >= n_sites || j >= n_sites)
    throw InvalidArgument("apply_heisenberg_gate: bad sites");
  // exp(-i phi s.s) = exp(-i phi/4) [1 + (exp(i phi) - 1) P_singlet]
  const Complex global = std::polar(1.0, -0.25 * phi);
  const Complex c = std::polar(1.0, phi) - 1.0;
  const Eigen::Index bi = Eigen::Index{1} << i, bj = Eigen::Index{1} << j;
  for (Eigen::Index x = 0; x < psi.size(); ++x) {
    if ((x & bi) && !(x & bj)) {
      const Eigen::Index y = x ^ bi ^ bj;
      const Complex a = psi(x), b = psi(y);
      const Complex singlet = 0.5 * (a - b);
      psi(x) = a + c * singlet;
      psi(y) = b - c * singlet;
    }
  }
  psi *= global;
}

BuiltState build_state(const StateRequest& request, const SpectrumTable& table) {
  BuiltState out;
  out.coefficients = zero_state(table);
  auto& amp = out.coefficients.amplitudes;
  const int n = table.n_sites();
  const double spin_target = request.spin_scale * std::sqrt(static_cast<double>(n));

  switch (request.kind) {
    case StateKind::eigenstate: {
      if (request.label < 0 || request.label >= static_cast<int>(table.size()))
        throw InvalidArgument("build_state: label out of range");
      const auto& mu = table.multiplet(request.label);
      if (!valid_projection(mu.spin, request.m)) throw InvalidArgument("build_state: m out of range");
      amp[mu.label]((request.m + mu.spin).twice() / 2) = 1.0;
      out.label = mu.label;
      out.spin = mu.spin;
      out.description = "eigenstate " + std::to_string(mu.label);
      break;
    }
    case StateKind::anomalous_A: {
      // sqrt(1/3)|A, s> + sqrt(2/3)|A, -s/2> needs an even integer s >= 2.
      const int b = nearest_spin_block(
          table, spin_target, [](HalfInteger s) { return s.twice() >= 4 && s.twice() % 4 == 0; },
          "anomalous_A (even integer spin)");
      const auto& blk = table.blocks()[b];
      const int label = nearest_in_block(blk, target_energy(request, table));
      const int s = blk.spin.twice() / 2;
      amp[label](2 * s) = std::sqrt(1.0 / 3.0);
      amp[label](s / 2) = std::sqrt(2.0 / 3.0);
      out.label = label;
      out.spin = blk.spin;
      out.description = "anomalous_A s=" + blk.spin.to_string();
      break;
    }
    case StateKind::anomalous_B: {
      int b;
      if (request.m_bar) {
        const HalfInteger mb = *request.m_bar;
        b = nearest_spin_block(table, spin_target, [&](HalfInteger s) { return valid_m_bar(s, mb); },
                               "anomalous_B with the requested m-bar");
      } else {
        b = nearest_spin_block(
            table, spin_target, [](HalfInteger s) { return valid_m_bar(s, default_m_bar(s)); },
            "anomalous_B");
      }
      const auto& blk = table.blocks()[b];
      const HalfInteger mb = request.m_bar ? *request.m_bar : default_m_bar(blk.spin);
      const int label = nearest_in_block(blk, target_energy(request, table));
      const HalfInteger one = HalfInteger::from_int(1);
      auto idx = [&](HalfInteger m) { return (m + blk.spin).twice() / 2; };
      amp[label](idx(mb)) = 0.5;
      amp[label](idx(mb + one)) = 0.5;
      amp[label](idx(-mb)) = 0.5;
      amp[label](idx(-mb - one)) = -0.5;
      out.label = label;
      out.spin = blk.spin;
      out.m_bar = mb;
      out.description = "anomalous_B s=" + blk.spin.to_string() + " m=" + mb.to_string();
      break;
    }
    case StateKind::singlet: {
      const auto b = table.block_of_spin(HalfInteger{});
      if (!b) throw InvalidArgument("build_state: no singlet multiplet (odd N?)");
      const auto& blk = table.blocks()[*b];
      const int label = nearest_in_block(blk, target_energy(request, table));
      amp[label](0) = 1.0;
      out.label = label;
      out.spin = blk.spin;
      out.description = "singlet " + std::to_string(label);
      break;
    }
    case StateKind::product: {
      if (!request.model || request.model->n_sites != n)
        throw InvalidArgument("build_state: product state needs the model of the same size");
      double j1 = 0.0, j2 = 0.0;
      for (double j : request.model->nn_couplings) j1 += j;
      for (double j : request.model->nnn_couplings) j2 += j;
      // Staggered angles theta0 +- delta: E = (J1 cos 2 delta + J2) / 4,
      // M = (N / 2) cos theta0 cos delta.
      const double e = target_energy(request, table);
      const double c2d = j1 != 0.0 ? (4.0 * e - j2) / j1 : 2.0;
      if (!(std::abs(c2d) <= 1.0))
        throw InfeasibleTarget("build_state: energy density outside the product-state family");
      const double delta = 0.5 * std::acos(c2d);
      const double ct = 2.0 * request.magnetization_density / std::cos(delta);
      if (!(std::abs(ct) <= 1.0))
        throw InfeasibleTarget("build_state: magnetization outside the product-state family at this energy");
      const double theta0 = std::acos(ct);
      std::vector<double> thetas(n);
      for (int j = 0; j < n; ++j) thetas[j] = theta0 + (j % 2 == 0 ? delta : -delta);
      Eigen::VectorXcd psi = product_state(thetas);
      std::mt19937_64 rng(request.brickwork_seed);
      std::uniform_real_distribution<double> angle(-request.brickwork_angle, request.brickwork_angle);
      for (int layer = 0; layer < request.brickwork_depth; ++layer)
        for (int start : {0, 1})
          for (int j = start; j + 1 < n; j += 2)
            apply_heisenberg_gate(psi, n, j, j + 1, std::numbers::pi * angle(rng));
      out.coefficients = from_full_vector(psi, table);
      const double norm = out.coefficients.norm_squared();
      if (std::abs(norm - 1.0) > 1e-10)
        throw SolverError("build_state: multiplet basis is incomplete (norm " + std::to_string(norm) + ")");
      out.description = "product";
      break;
    }
  }
  return out;
}

}  // namespace naeth
