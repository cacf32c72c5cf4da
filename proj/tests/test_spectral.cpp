#include "doctest.h"

#include <cmath>
#include <map>

#include "naeth/errors.hpp"
#include "naeth/spectral.hpp"
#include "oracles/dense_oracle.hpp"

using namespace naeth;

namespace {

SpectrumTable decompose_model(const SpinModelSpec& spec) {
  return decompose(build_hamiltonian(spec), build_spin_operators(spec.n_sites),
                   DecomposeOptions{model_spec_hash(spec)});
}

SpinModelSpec two_spin() {
  SpinModelSpec spec;
  spec.n_sites = 2;
  spec.nn_couplings = {1.0};
  return spec;
}

std::map<int, int> counts_by_spin(const SpectrumTable& t) {
  std::map<int, int> out;
  for (const auto& mp : t.multiplets()) ++out[mp.spin.twice()];
  return out;
}

}  // namespace

TEST_CASE("two-spin singlet and triplet") {
  const auto t = decompose_model(two_spin());
  REQUIRE(t.size() == 2);
  CHECK(t.multiplet(0).spin.twice() == 0);
  CHECK(t.multiplet(0).energy == doctest::Approx(-0.75));
  CHECK(t.multiplet(1).spin.twice() == 2);
  CHECK(t.multiplet(1).energy == doctest::Approx(0.25));
  CHECK(t.total_dimension() == 4);
}

TEST_CASE("four-site multiplet counts") {
  const auto t = decompose_model(SpinModelSpec::default_model(4, 2));
  const auto c = counts_by_spin(t);
  CHECK(c.at(0) == 2);
  CHECK(c.at(2) == 3);
  CHECK(c.at(4) == 1);
}

TEST_CASE("multiplet invariants") {
  for (int n : {5, 8}) {
    const auto spec = SpinModelSpec::default_model(n, 9);
    const auto h = build_hamiltonian(spec);
    const auto ops = build_spin_operators(n);
    const auto t = decompose(h, ops);
    CHECK(t.total_dimension() == (std::size_t{1} << n));
    const Eigen::MatrixXd hd = oracle::dense_real(h);
    const Eigen::MatrixXd s2 = oracle::dense_real(ops.s_squared);
    const Eigen::MatrixXd sz = oracle::dense_real(ops.sz);
    const Eigen::MatrixXd sm = oracle::dense_real(ops.sminus);
    double worst_norm = 0, worst_res = 0, worst_lower = 0, worst_diag = 0;
    for (const auto& mp : t.multiplets()) {
      const double s = mp.spin.value();
      for (int tm = -mp.spin.twice(); tm <= mp.spin.twice(); tm += 2) {
        const auto m = HalfInteger::from_twice(tm);
        const Eigen::VectorXd v = t.full_vector(mp.label, m);
        worst_norm = std::max(worst_norm, std::abs(v.norm() - 1.0));
        worst_res = std::max({worst_res, (hd * v - mp.energy * v).norm(),
                              (s2 * v - s * (s + 1) * v).norm(), (sz * v - m.value() * v).norm()});
        worst_diag = std::max(worst_diag, std::abs(v.dot(hd * v) - mp.energy));
        if (tm > -mp.spin.twice()) {
          const Eigen::VectorXd lower = t.full_vector(mp.label, HalfInteger::from_twice(tm - 2));
          const double c = std::sqrt(s * (s + 1) - m.value() * (m.value() - 1));
          worst_lower = std::max(worst_lower, (sm * v - c * lower).norm());
        }
      }
    }
    CHECK(worst_norm <= 1e-12);
    CHECK(worst_res <= 1e-10);
    CHECK(worst_lower <= 1e-10);
    CHECK(worst_diag <= 1e-10);
  }
}

TEST_CASE("decomposition agrees with naive dense diagonalization") {
  for (int n : {4, 6, 8}) {
    const auto spec = SpinModelSpec::default_model(n, 21);
    const auto h = build_hamiltonian(spec);
    const auto ops = build_spin_operators(n);
    const auto t = decompose(h, ops);
    const auto spaces = oracle::dense_eigenspaces(h, ops);

    std::vector<double> ours;
    for (const auto& mp : t.multiplets()) {
      for (int i = 0; i <= mp.spin.twice(); ++i) ours.push_back(mp.energy);
    }
    std::sort(ours.begin(), ours.end());
    std::vector<double> theirs;
    for (const auto& sp : spaces) {
      for (Eigen::Index i = 0; i < sp.vectors.cols(); ++i) theirs.push_back(sp.energy);
    }
    std::sort(theirs.begin(), theirs.end());
    REQUIRE(ours.size() == theirs.size());
    double worst = 0;
    for (std::size_t i = 0; i < ours.size(); ++i) worst = std::max(worst, std::abs(ours[i] - theirs[i]));
    CHECK(worst <= 1e-10);

    double worst_proj = 0;
    for (const auto& sp : spaces) {
      Eigen::MatrixXd ours_proj = Eigen::MatrixXd::Zero(sp.vectors.rows(), sp.vectors.rows());
      int matched = 0;
      for (const auto& mp : t.multiplets()) {
        if (std::abs(mp.energy - sp.energy) > 1e-8 || std::abs(mp.spin.value() - sp.spin) > 0.25) continue;
        for (int tm = -mp.spin.twice(); tm <= mp.spin.twice(); tm += 2) {
          const Eigen::VectorXd v = t.full_vector(mp.label, HalfInteger::from_twice(tm));
          ours_proj += v * v.transpose();
          ++matched;
        }
      }
      CHECK(matched == sp.vectors.cols());
      const Eigen::MatrixXd ref = sp.vectors * sp.vectors.transpose();
      worst_proj = std::max(worst_proj, (ours_proj - ref).cwiseAbs().maxCoeff());
    }
    CHECK(worst_proj <= 1e-8);
  }
}

TEST_CASE("decompose refuses a symmetry-breaking Hamiltonian") {
  const auto ops = build_spin_operators(4);
  OperatorMatrix broken = build_hamiltonian(SpinModelSpec::default_model(4, 1));
  broken.matrix += 0.2 * ops.sx.matrix;
  CHECK_THROWS_AS(decompose(broken, ops), SolverError);
}

TEST_CASE("sorting, labels and determinism") {
  const auto spec = SpinModelSpec::default_model(7, 4);
  const auto a = decompose_model(spec);
  const auto b = decompose_model(spec);
  CHECK(table_digest(a) == table_digest(b));
  for (std::size_t i = 1; i < a.size(); ++i) {
    const auto& p = a.multiplet(static_cast<int>(i) - 1);
    const auto& q = a.multiplet(static_cast<int>(i));
    CHECK(q.label == static_cast<int>(i));
    CHECK((p.spin < q.spin || (p.spin == q.spin && p.energy <= q.energy)));
  }
  const auto threaded = decompose(build_hamiltonian(spec), build_spin_operators(7),
                                  DecomposeOptions{model_spec_hash(spec), 1e-10, 3});
  CHECK(table_digest(threaded) == table_digest(a));
  CHECK(a.model_spec_hash() == model_spec_hash(spec));
  CHECK(model_spec_hash(spec) != model_spec_hash(SpinModelSpec::default_model(7, 5)));
}

TEST_CASE("entropy surface") {
  const auto t = decompose_model(two_spin());
  const auto one = entropy_surface(t, 2.0, 1.0);
  CHECK(one.total_count() == 2);
  const auto ts = entropy_surface(t, 0.5, 1.0);
  const auto s0 = ts.entropy_at(-0.75, 0.0);
  REQUIRE(s0.has_value());
  CHECK(*s0 == doctest::Approx(-std::log(0.5)));
  CHECK_THROWS_AS(entropy_surface(t, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(entropy_surface(t, 0.5, -1.0), InvalidArgument);

  for (int n : {6, 8}) {
    const auto tab = decompose_model(SpinModelSpec::default_model(n, 1));
    const auto surf = entropy_surface(tab, 0.5, 1.0);
    CHECK(surf.total_count() == static_cast<int>(tab.size()));
    CHECK(std::abs(surf.integrated_count() / tab.size() - 1.0) <= 0.01);
  }
}

TEST_CASE("degeneracy report") {
  const auto t = decompose_model(two_spin());
  const auto r = degeneracy_report(t, 1e-10);
  REQUIRE(r.forced.size() == 1);
  CHECK(r.forced[0].second == 3);
  CHECK(r.accidental.empty());
  CHECK_THROWS_AS(degeneracy_report(t, 0.0), InvalidArgument);

  const int n = 4;
  const auto ops = build_spin_operators(n);
  const OperatorMatrix zero{n, SparseComplex(16, 16), true};
  const auto tz = decompose(zero, ops);
  const auto rz = degeneracy_report(tz, 1e-10);
  const std::size_t pairs = tz.size() * (tz.size() - 1) / 2;
  CHECK(rz.accidental.size() == pairs);
  CHECK(energy_classes(tz, 1e-10).size() == 1);

  const auto generic = decompose_model(SpinModelSpec::default_model(8, 3));
  const auto rg = degeneracy_report(generic, 1e-10);
  CHECK(rg.same_spin_hazards == 0);
  std::size_t in_classes = 0;
  for (const auto& c : energy_classes(generic, 1e-10)) in_classes += c.size();
  CHECK(in_classes == generic.size());
}
