#pragma once

#include <filesystem>
#include <optional>

#include "naeth/spectral.hpp"

namespace naeth {

inline constexpr std::uint32_t kCacheVersion = 1;

/// Binary layout (little endian): "NAETHSPC", u32 version, u32 n_sites,
/// u64 model hash, f64 degeneracy tolerance, u32 block count, then per block
/// i32 twice_spin, u32 count, f64 energies[count], and for each m a u64 row
/// count followed by the column-major vectors.
void save_spectrum(const SpectrumTable& table, const std::filesystem::path& path);

/// Throws InvalidArgument on a malformed or mismatched file.
SpectrumTable load_spectrum(const std::filesystem::path& path);

/// nullopt unless the file exists and matches (n_sites, model hash).
std::optional<SpectrumTable> try_load_spectrum(const std::filesystem::path& path, int n_sites,
                                               std::uint64_t model_hash);

std::filesystem::path cache_path(const std::filesystem::path& dir, int n_sites, std::uint64_t model_hash);

}  // namespace naeth
