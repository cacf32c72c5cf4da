#pragma once

#include <cstdint>
#include <vector>

namespace naeth {

/// Computational basis states of n spin-1/2 sites with a fixed number of up
/// spins. Bit j of a state set means site j points up (s_z = +1/2).
/// States are listed in increasing numerical order.
class SectorBasis {
 public:
  SectorBasis(int n_sites, int n_up);

  int n_sites() const { return n_sites_; }
  int n_up() const { return n_up_; }
  /// 2 S_z = 2 n_up - n_sites.
  int twice_m() const { return 2 * n_up_ - n_sites_; }
  std::size_t size() const { return states_.size(); }
  std::uint32_t state(std::size_t i) const { return states_[i]; }
  const std::vector<std::uint32_t>& states() const { return states_; }

  /// Position of `state` in this sector. The state must have n_up set bits.
  std::size_t index_of(std::uint32_t state) const;

 private:
  int n_sites_;
  int n_up_;
  std::vector<std::uint32_t> states_;
  std::vector<std::vector<std::size_t>> binom_;
};

/// All S_z sectors of an n-site chain, indexed by n_up = 0..n.
class SzDecomposition {
 public:
  explicit SzDecomposition(int n_sites);

  int n_sites() const { return n_sites_; }
  const SectorBasis& by_n_up(int n_up) const { return sectors_.at(n_up); }
  /// Sector with 2 S_z = twice_m; throws InvalidArgument if out of range.
  const SectorBasis& by_twice_m(int twice_m) const;
  bool has_twice_m(int twice_m) const;

 private:
  int n_sites_;
  std::vector<SectorBasis> sectors_;
};

std::size_t binomial(int n, int k);

}  // namespace naeth
