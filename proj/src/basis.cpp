#include "naeth/basis.hpp"

#include <bit>
#include <string>

#include "naeth/errors.hpp"

namespace naeth {

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t out = 1;
  for (int i = 1; i <= k; ++i) out = out * static_cast<std::size_t>(n - k + i) / i;
  return out;
}

SectorBasis::SectorBasis(int n_sites, int n_up) : n_sites_(n_sites), n_up_(n_up) {
  if (n_sites < 1 || n_sites > 30 || n_up < 0 || n_up > n_sites) {
    throw InvalidArgument("SectorBasis: bad (n_sites, n_up) = (" + std::to_string(n_sites) +
                          ", " + std::to_string(n_up) + ")");
  }
  binom_.assign(n_sites + 1, std::vector<std::size_t>(n_up + 2, 0));
  for (int n = 0; n <= n_sites; ++n) {
    for (int k = 0; k <= n_up + 1; ++k) binom_[n][k] = binomial(n, k);
  }
  states_.reserve(binomial(n_sites, n_up));
  if (n_up == 0) {
    states_.push_back(0);
    return;
  }
  // Gosper's hack enumerates fixed-popcount words in increasing order.
  std::uint32_t v = (n_up == 32) ? ~0u : ((1u << n_up) - 1u);
  const std::uint64_t limit = std::uint64_t{1} << n_sites;
  while (v < limit) {
    states_.push_back(v);
    const std::uint32_t t = v | (v - 1);
    if (t == ~0u) break;
    v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
  }
}

std::size_t SectorBasis::index_of(std::uint32_t state) const {
  // Colexicographic rank, which coincides with numerical order at fixed popcount.
  std::size_t rank = 0;
  int seen = 0;
  for (int p = 0; p < n_sites_ && seen < n_up_; ++p) {
    if (state & (1u << p)) {
      ++seen;
      rank += binom_[p][seen];
    }
  }
  return rank;
}

SzDecomposition::SzDecomposition(int n_sites) : n_sites_(n_sites) {
  sectors_.reserve(n_sites + 1);
  for (int n_up = 0; n_up <= n_sites; ++n_up) sectors_.emplace_back(n_sites, n_up);
}

bool SzDecomposition::has_twice_m(int twice_m) const {
  const int twice_up = twice_m + n_sites_;
  return twice_up >= 0 && twice_up % 2 == 0 && twice_up / 2 <= n_sites_;
}

const SectorBasis& SzDecomposition::by_twice_m(int twice_m) const {
  if (!has_twice_m(twice_m)) {
    throw InvalidArgument("no S_z sector with 2m = " + std::to_string(twice_m));
  }
  return sectors_[(twice_m + n_sites_) / 2];
}

}  // namespace naeth
