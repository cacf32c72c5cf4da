#include "naeth/clebsch_gordan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "naeth/errors.hpp"

namespace naeth {

namespace {

mpz_class factorial(int n) {
  mpz_class out;
  mpz_fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n));
  return out;
}

int parity_sign(int n) { return (n % 2 == 0) ? 1 : -1; }

// Racah single-sum form of <s, m | j1, m1; j2, m2>, all arguments doubled.
// Caller guarantees selection rules and triangle condition.
ExactScalar racah_sum(int s2, int m2, int j1_2, int m1_2, int j2_2, int mq_2) {
  const int a = (s2 + j1_2 - j2_2) / 2;   // s + s' - k
  const int b = (s2 - j1_2 + j2_2) / 2;   // s - s' + k
  const int c = (j1_2 + j2_2 - s2) / 2;   // s' + k - s
  const int spm = (s2 + m2) / 2, smm = (s2 - m2) / 2;
  const int j1m = (j1_2 - m1_2) / 2, j1p = (j1_2 + m1_2) / 2;
  const int j2m = (j2_2 - mq_2) / 2, j2p = (j2_2 + mq_2) / 2;
  const int total = (s2 + j1_2 + j2_2) / 2 + 1;

  mpq_class prefactor(mpz_class(s2 + 1) * factorial(a) * factorial(b) * factorial(c) *
                          factorial(spm) * factorial(smm) * factorial(j1m) * factorial(j1p) *
                          factorial(j2m) * factorial(j2p),
                      factorial(total));
  prefactor.canonicalize();

  // Arguments of the six denominator factorials as functions of l.
  const int d4 = (s2 - j2_2 + m1_2) / 2;  // s - k + m' + l
  const int d5 = (s2 - j1_2 - mq_2) / 2;  // s - s' - q + l
  const int l_min = std::max({0, -d4, -d5});
  const int l_max = std::min({c, j1m, j2p});

  mpq_class sum(0);
  for (int l = l_min; l <= l_max; ++l) {
    const mpz_class den = factorial(l) * factorial(c - l) * factorial(j1m - l) *
                          factorial(j2p - l) * factorial(d4 + l) * factorial(d5 + l);
    mpq_class term(parity_sign(l), den);
    term.canonicalize();
    sum += term;
  }
  return ExactScalar(sgn(sum), prefactor * sum * sum);
}

}  // namespace

void CGKey::validate() const {
  const auto check = [this](HalfInteger j, HalfInteger mj, const char* name) {
    if (!valid_projection(j, mj)) {
      throw InvalidArgument(std::string("invalid ") + name + " pair in CG key " + to_string());
    }
  };
  check(s, m, "(s, m)");
  check(s_prime, m_prime, "(s', m')");
  check(k, q, "(k, q)");
}

std::string CGKey::to_string() const {
  return "<" + s.to_string() + "," + m.to_string() + "|" + s_prime.to_string() + "," +
         m_prime.to_string() + ";" + k.to_string() + "," + q.to_string() + ">";
}

ExactScalar cg_exact(const CGKey& key) {
  key.validate();
  int s2 = key.s.twice(), m2 = key.m.twice();
  int sp2 = key.s_prime.twice(), mp2 = key.m_prime.twice();
  int k2 = key.k.twice(), q2 = key.q.twice();

  if (m2 != mp2 + q2) return ExactScalar::zero();
  if ((sp2 + k2 - s2) % 2 != 0) return ExactScalar::zero();
  if (s2 < std::abs(sp2 - k2) || s2 > sp2 + k2) return ExactScalar::zero();

  // The Racah expression is quoted for m >= 0 and s' > k; fold the remaining
  // arguments into that region with the standard symmetries.
  const int swap_phase = parity_sign((sp2 + k2 - s2) / 2);
  int phase = 1;
  if (m2 < 0) {
    phase *= swap_phase;
    m2 = -m2;
    mp2 = -mp2;
    q2 = -q2;
  }
  if (sp2 < k2) {
    phase *= swap_phase;
    std::swap(sp2, k2);
    std::swap(mp2, q2);
  }
  const ExactScalar value = racah_sum(s2, m2, sp2, mp2, k2, q2);
  return phase > 0 ? value : -value;
}

double cg_value(HalfInteger s, HalfInteger m, HalfInteger s_prime, HalfInteger m_prime,
                HalfInteger k, HalfInteger q) {
  return cg_exact(CGKey{s, m, s_prime, m_prime, k, q}).to_double();
}

AsymptoticCG cg_asymptotic(HalfInteger s, HalfInteger m, HalfInteger k, HalfInteger q) {
  if (s.twice() < 2) throw InvalidArgument("cg_asymptotic: requires s >= 1");
  if (!k.is_integer() || !q.is_integer()) {
    throw InvalidArgument("cg_asymptotic: k and q must be integers");
  }
  if (!valid_projection(s, m) || !valid_projection(k, q) || k > s) {
    throw InvalidArgument("cg_asymptotic: requires |m| <= s and |q| <= k <= s");
  }
  if (!valid_projection(s, m + q)) {
    throw InvalidArgument("cg_asymptotic: m + q outside [-s, s]");
  }
  const int delta = (s - m).twice() / 2;
  const int kk = k.twice() / 2;
  const int qa = std::abs(q.twice() / 2);
  const double two_s = static_cast<double>(s.twice());
  const auto lf = [](int n) { return std::lgamma(n + 1.0); };

  AsymptoticCG out;
  if (q.twice() >= 0) {
    const double log_ratio = lf(delta) + lf(kk + qa) - lf(delta - qa) - lf(kk - qa);
    out.value = parity_sign(qa) / (std::tgamma(qa + 1.0) * std::pow(two_s, 0.5 * qa)) *
                std::exp(0.5 * log_ratio);
  } else {
    const double log_ratio = lf(delta + qa) + lf(kk + qa) - lf(delta) - lf(kk - qa);
    out.value = 1.0 / (std::tgamma(qa + 1.0) * std::pow(two_s, 0.5 * qa)) *
                std::exp(0.5 * log_ratio);
  }
  out.relative_error_estimate = static_cast<double>(delta) / s.value();
  out.regime_warning = 2 * delta > s.value();
  return out;
}

std::pair<ExactScalar, ExactScalar> cg_symmetry(HalfInteger s, HalfInteger m, HalfInteger k) {
  const HalfInteger one = HalfInteger::from_int(1);
  if (!k.is_integer() || k.twice() < 2) {
    throw InvalidArgument("cg_symmetry: k must be an integer >= 1");
  }
  const ExactScalar first = cg_exact(CGKey{s, m + one, s, m, k, one});
  const ExactScalar second = cg_exact(CGKey{s, -m, s, -m - one, k, one});
  const ExactScalar expected = parity_sign(k.twice() / 2 + 1) > 0 ? second : -second;
  if (!(first == expected)) {
    throw std::logic_error("CG symmetry relation violated at s=" + s.to_string() +
                           " m=" + m.to_string() + " k=" + k.to_string());
  }
  return {first, second};
}

double wigner_eckart_assemble(double reduced, const CGKey& key) {
  if (reduced == 0.0) return 0.0;
  return cg_exact(key).to_double() * reduced;
}

}  // namespace naeth
