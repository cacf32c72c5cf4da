#include "doctest.h"

#include <cmath>
#include <random>

#include "naeth/clebsch_gordan.hpp"
#include "naeth/errors.hpp"
#include "naeth/tensor.hpp"

using namespace naeth;

namespace {

struct Fixture {
  SpinModelSpec spec;
  OperatorMatrix h;
  SpinOperators ops;
  SpectrumTable table;

  explicit Fixture(const SpinModelSpec& s)
      : spec(s),
        h(build_hamiltonian(s)),
        ops(build_spin_operators(s.n_sites)),
        table(decompose(h, ops, DecomposeOptions{model_spec_hash(s)})) {}
};

const Fixture& eight_sites() {
  static const Fixture f(SpinModelSpec::default_model(8, 11));
  return f;
}

std::vector<SphericalTensorFamily> families(int n) {
  return {build_tensor(TensorKind::identity, {}, n),
          build_tensor(TensorKind::dipole, {n / 2}, n),
          build_tensor(TensorKind::quadrupole, {n / 2 - 1, n / 2}, n),
          build_tensor(TensorKind::quadrupole, {0, 2}, n),
          build_tensor(TensorKind::scalar, {n / 2 - 1, n / 2}, n)};
}

}  // namespace

TEST_CASE("tensor families obey the spherical-tensor algebra") {
  const auto ops = build_spin_operators(6);
  for (const auto& t : families(6)) {
    CAPTURE(t.description);
    CHECK(static_cast<int>(t.components.size()) == 2 * t.rank + 1);
    const auto r = check_tensor_algebra(t, ops);
    CHECK(r.sz_commutator <= 1e-12);
    CHECK(r.ladder_commutator <= 1e-12);
    CHECK(r.hermiticity <= 1e-12);
  }
}

TEST_CASE("scalar operators commute with every spin component") {
  const auto ops = build_spin_operators(5);
  const auto t = build_tensor(TensorKind::scalar, {1, 3}, 5);
  const auto& t0 = t.component(0).matrix;
  for (const auto* s : {&ops.sx, &ops.sy, &ops.sz}) {
    SparseComplex c = s->matrix * t0 - t0 * s->matrix;
    CHECK(max_abs(c) <= 1e-14);
  }
}

TEST_CASE("build_tensor rejects bad input") {
  CHECK_THROWS_AS(build_tensor(TensorKind::dipole, {}, 4), InvalidArgument);
  CHECK_THROWS_AS(build_tensor(TensorKind::dipole, {4}, 4), InvalidArgument);
  CHECK_THROWS_AS(build_tensor(TensorKind::quadrupole, {1, 1}, 4), InvalidArgument);
  CHECK_THROWS_AS(tensor_kind_from_string("octupole"), InvalidArgument);
  CHECK(tensor_kind_from_string("quadrupole_k2") == TensorKind::quadrupole);
  const auto t = build_tensor(TensorKind::dipole, {0}, 3);
  CHECK_THROWS_AS(t.component(2), InvalidArgument);
}

TEST_CASE("reduced elements are constant across probes") {
  const auto& f = eight_sites();
  for (const auto& t : families(8)) {
    CAPTURE(t.description);
    const auto r = reduced_elements(t, f.table);
    CHECK(r.max_spread() <= 1e-8);
    CHECK(max_selection_rule_violation(t, f.table) <= 1e-12);
  }
}

TEST_CASE("Wigner-Eckart reconstruction reproduces full-space matrix elements") {
  const auto& f = eight_sites();
  const auto t = build_tensor(TensorKind::quadrupole, {3, 4}, 8);
  const auto r = reduced_elements(t, f.table);
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(f.table.size()) - 1);
  int checked = 0;
  while (checked < 200) {
    const auto& a = f.table.multiplet(pick(rng));
    const auto& b = f.table.multiplet(pick(rng));
    const auto red = r.value(a.label, b.label);
    if (!red) continue;
    for (int q = -2; q <= 2; ++q)
      for (int tmp = -b.spin.twice(); tmp <= b.spin.twice(); tmp += 2) {
        const auto mp = HalfInteger::from_twice(tmp);
        const auto m = mp + HalfInteger::from_int(q);
        if (std::abs(m.twice()) > a.spin.twice()) continue;
        const Eigen::VectorXd va = f.table.full_vector(a.label, m);
        const Eigen::VectorXd vb = f.table.full_vector(b.label, mp);
        const Eigen::VectorXcd tb = t.component(q).matrix * vb.cast<Complex>();
        const Complex direct = va.cast<Complex>().dot(tb);
        const CGKey key{a.spin, m, b.spin, mp, HalfInteger::from_int(2), HalfInteger::from_int(q)};
        CHECK(std::abs(direct - wigner_eckart_assemble(*red, key)) <= 1e-10);
      }
    ++checked;
  }
}

TEST_CASE("diagonal and single-pair variants agree with the full table") {
  const auto& f = eight_sites();
  for (const auto& t : families(8)) {
    CAPTURE(t.description);
    const auto full = reduced_elements(t, f.table);
    const auto diag = diagonal_reduced_elements(t, f.table);
    for (const auto& mu : f.table.multiplets()) {
      const auto a = full.value(mu.label, mu.label);
      REQUIRE(a.has_value() == diag.value[mu.label].has_value());
      if (a) CHECK(std::abs(*a - *diag.value[mu.label]) <= 1e-12);
    }
    for (int alpha : {0, 7, 33})
      for (int beta : {1, 12, 40}) {
        const auto a = full.value(alpha, beta);
        const auto b = reduced_element_pair(t, f.table, alpha, beta);
        REQUIRE(a.has_value() == b.has_value());
        if (a) CHECK(std::abs(*a - *b) <= 1e-12);
      }
  }
}

TEST_CASE("threaded reduced elements equal serial ones") {
  const auto& f = eight_sites();
  const auto t = build_tensor(TensorKind::dipole, {2}, 8);
  const auto serial = reduced_elements(t, f.table);
  const auto threaded = reduced_elements(t, f.table, ReducedOptions{0.1, 3});
  REQUIRE(serial.blocks().size() == threaded.blocks().size());
  for (std::size_t i = 0; i < serial.blocks().size(); ++i)
    CHECK(serial.blocks()[i].value == threaded.blocks()[i].value);
}

TEST_CASE("rank-k elements vanish on singlets") {
  const auto& f = eight_sites();
  for (const auto& t : families(8)) {
    if (t.rank == 0) continue;
    const auto diag = diagonal_reduced_elements(t, f.table);
    for (const auto& mu : f.table.multiplets())
      if (mu.spin.twice() == 0) CHECK_FALSE(diag.value[mu.label].has_value());
  }
  // The full-space matrix elements themselves are zero.
  const auto t = build_tensor(TensorKind::quadrupole, {2, 3}, 8);
  const auto& t0 = t.component(0).matrix;
  for (const auto& mu : f.table.multiplets()) {
    if (mu.spin.twice() != 0) continue;
    const Eigen::VectorXcd v = f.table.full_vector(mu.label, HalfInteger{}).cast<Complex>();
    const Eigen::VectorXcd tv = t0 * v;
    CHECK(std::abs(v.dot(tv)) <= 1e-10);
  }
}

TEST_CASE("calibration against operators diagonal in the eigenbasis") {
  const auto& f = eight_sites();
  SUBCASE("identity") {
    const auto t = build_tensor(TensorKind::identity, {}, 8);
    const auto r = reduced_elements(t, f.table);
    for (const auto& a : f.table.multiplets())
      for (const auto& b : f.table.multiplets()) {
        const auto v = r.value(a.label, b.label);
        if (!v) continue;
        CHECK(std::abs(*v - (a.label == b.label ? 1.0 : 0.0)) <= 1e-12);
      }
    const auto fit = eth_diagonal_fit(diagonal_reduced_elements(t, f.table), f.table, BinWidths{});
    for (const auto& bin : fit.bins) {
      CHECK(std::abs(bin.mean - 1.0) <= 1e-12);
      CHECK(bin.stddev <= 1e-12);
    }
  }
  SUBCASE("Hamiltonian as a scalar") {
    SphericalTensorFamily t;
    t.n_sites = 8;
    t.rank = 0;
    t.components[0] = f.h;
    const auto r = reduced_elements(t, f.table);
    for (const auto& a : f.table.multiplets())
      for (const auto& b : f.table.multiplets()) {
        const auto v = r.value(a.label, b.label);
        if (!v) continue;
        CHECK(std::abs(*v - (a.label == b.label ? a.energy : 0.0)) <= 1e-12);
      }
  }
}

TEST_CASE("diagonal fit bins and residuals") {
  const auto& f = eight_sites();
  const auto t = build_tensor(TensorKind::quadrupole, {3, 4}, 8);
  const auto diag = diagonal_reduced_elements(t, f.table);
  const BinWidths w{0.5, 1.0, 5};
  const auto fit = eth_diagonal_fit(diag, f.table, w);
  int binned = 0;
  for (const auto& bin : fit.bins) binned += bin.count;
  int defined = 0;
  for (const auto& mu : f.table.multiplets()) defined += diag.value[mu.label].has_value();
  CHECK(binned == defined);
  // Residuals in each defined bin sum to zero.
  std::map<std::pair<int, int>, double> sums;
  for (std::size_t l = 0; l < fit.residuals.size(); ++l)
    if (fit.residuals[l]) sums[*fit.bin_of_label[l]] += *fit.residuals[l];
  for (const auto& [k, s] : sums) CHECK(std::abs(s) <= 1e-12);
  // Pooled mid-spectrum spread from the raw members of the energy slice.
  const double e_mid = trace_energy(f.table);
  const int ie = static_cast<int>(std::floor((e_mid - fit.energy_origin) / w.energy));
  std::map<int, std::vector<double>> slice;
  for (const auto& mu : f.table.multiplets()) {
    if (!diag.value[mu.label]) continue;
    if (static_cast<int>(std::floor((mu.energy - fit.energy_origin) / w.energy)) != ie) continue;
    slice[mu.spin.twice()].push_back(*diag.value[mu.label]);
  }
  double num = 0.0;
  int dof = 0, total = 0;
  for (const auto& [twice_s, xs] : slice) {
    double mean = 0.0;
    for (double x : xs) mean += x / xs.size();
    for (double x : xs) num += (x - mean) * (x - mean);
    dof += static_cast<int>(xs.size()) - 1;
    total += static_cast<int>(xs.size());
  }
  const auto pooled = fit.pooled_stddev_at(e_mid);
  REQUIRE(total >= w.min_count);
  REQUIRE(pooled.has_value());
  CHECK(*pooled == doctest::Approx(std::sqrt(num / dof)).epsilon(1e-12));
  const auto strict = eth_diagonal_fit(diag, f.table, BinWidths{0.5, 1.0, total + 1});
  CHECK_FALSE(strict.pooled_stddev_at(e_mid).has_value());
  CHECK_THROWS_AS(eth_diagonal_fit(diag, f.table, BinWidths{0.0, 1.0, 5}), InvalidArgument);
}

TEST_CASE("off-diagonal statistics") {
  const auto& f = eight_sites();
  const auto t = build_tensor(TensorKind::quadrupole, {3, 4}, 8);
  const auto r = reduced_elements(t, f.table);
  const auto ent = entropy_surface(f.table, 0.5, 1.0);
  const auto stats = eth_offdiagonal_stats(r, f.table, ent, BinWidths{0.5, 1.0, 5});
  CHECK(stats.samples.size() > 1000);
  for (const auto& s : stats.samples) {
    CHECK(s.alpha < s.beta);
    const auto direct = r.value(s.alpha, s.beta);
    REQUIRE(direct.has_value());
    CHECK(std::abs(s.scaled - *direct * std::exp(0.5 * *ent.entropy_at(s.mean_energy, s.mean_spin))) <=
          1e-12 * (1.0 + std::abs(s.scaled)));
  }
  CHECK(std::abs(stats.residual_variance - 1.0) <= 0.25);

  SUBCASE("operators diagonal in the eigenbasis give zero off-diagonal elements") {
    const auto id = reduced_elements(build_tensor(TensorKind::identity, {}, 8), f.table);
    const auto s = eth_offdiagonal_stats(id, f.table, ent, BinWidths{});
    CHECK(s.max_abs_element <= 1e-12);
  }
}

TEST_CASE("least squares") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto fit = least_squares(x, y);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.slope_stderr <= 1e-12);
  const std::vector<double> same{1, 1};
  CHECK_THROWS_AS(least_squares(same, same), InvalidArgument);
}

TEST_CASE("spin-density slope") {
  std::vector<Fixture> fixtures;
  fixtures.emplace_back(SpinModelSpec::ferromagnetic(6));
  fixtures.emplace_back(SpinModelSpec::ferromagnetic(8));
  std::vector<DiagonalReducedElements> elems;
  for (const auto& f : fixtures)
    elems.push_back(diagonal_reduced_elements(build_tensor(TensorKind::scalar, {2, 3}, f.spec.n_sites),
                                              f.table));
  std::vector<SizedDiagonal> sized;
  for (std::size_t i = 0; i < fixtures.size(); ++i) sized.push_back({&fixtures[i].table, &elems[i]});
  const auto slope = spin_density_slope(sized, -1.0, 1.0);
  CHECK(slope.samples > 10);
  CHECK(slope.slope_ci_low <= slope.fit.slope);
  CHECK(slope.fit.slope <= slope.slope_ci_high);
  CHECK_THROWS_AS(spin_density_slope(sized, 1.0, -1.0), InvalidArgument);
}
