#include "naeth/cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "naeth/errors.hpp"

namespace naeth {

namespace {

constexpr char kMagic[8] = {'N', 'A', 'E', 'T', 'H', 'S', 'P', 'C'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& p) : out_(p, std::ios::binary) {
    if (!out_) throw InvalidArgument("cannot write cache file '" + p.string() + "'");
  }
  void bytes(const void* d, std::size_t n) { out_.write(static_cast<const char*>(d), n); }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void finish() {
    out_.flush();
    if (!out_) throw ResourceError("failed while writing cache file");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& p) : in_(p, std::ios::binary), path_(p) {
    if (!in_) throw InvalidArgument("cannot open cache file '" + p.string() + "'");
  }
  void bytes(void* d, std::size_t n) {
    in_.read(static_cast<char*>(d), n);
    if (!in_) throw InvalidArgument("truncated cache file '" + path_.string() + "'");
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

struct Header {
  std::uint32_t version = 0, n_sites = 0;
  std::uint64_t hash = 0;
  double tolerance = 0.0;
};

Header read_header(Reader& r, const std::filesystem::path& path) {
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw InvalidArgument("'" + path.string() + "' is not a spectrum cache file");
  Header h;
  h.version = r.u32();
  if (h.version != kCacheVersion)
    throw InvalidArgument(fmt::format("cache file version {} unsupported (expected {})", h.version,
                                      kCacheVersion));
  h.n_sites = r.u32();
  h.hash = r.u64();
  h.tolerance = r.f64();
  return h;
}

}  // namespace

void save_spectrum(const SpectrumTable& table, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    Writer w(tmp);
    w.bytes(kMagic, 8);
    w.u32(kCacheVersion);
    w.u32(static_cast<std::uint32_t>(table.n_sites()));
    w.u64(table.model_spec_hash());
    w.f64(table.degeneracy_tolerance());
    w.u32(static_cast<std::uint32_t>(table.blocks().size()));
    for (const auto& b : table.blocks()) {
      w.u32(static_cast<std::uint32_t>(b.spin.twice()));
      w.u32(static_cast<std::uint32_t>(b.count()));
      for (double e : b.energies) w.f64(e);
      for (const auto& v : b.vectors) {
        w.u64(static_cast<std::uint64_t>(v.rows()));
        for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v.data()[i]);
      }
    }
    w.finish();
  }
  std::filesystem::rename(tmp, path);
}

SpectrumTable load_spectrum(const std::filesystem::path& path) {
  Reader r(path);
  const Header h = read_header(r, path);
  if (h.n_sites < 1 || h.n_sites > 30) throw InvalidArgument("cache file has a bad site count");
  const std::uint32_t n_blocks = r.u32();
  if (n_blocks > h.n_sites + 1u) throw InvalidArgument("cache file has a bad block count");
  std::vector<SpinBlock> blocks(n_blocks);
  for (auto& b : blocks) {
    const auto twice = static_cast<int>(r.u32());
    if (twice < 0 || twice > static_cast<int>(h.n_sites)) throw InvalidArgument("cache file has a bad spin");
    b.spin = HalfInteger::from_twice(twice);
    const std::uint32_t count = r.u32();
    if (count > (1u << h.n_sites)) throw InvalidArgument("cache file has a bad multiplet count");
    b.energies.resize(count);
    for (auto& e : b.energies) e = r.f64();
    for (int i = 0; i <= twice; ++i) {
      const std::uint64_t rows = r.u64();
      if (rows > (std::uint64_t{1} << h.n_sites)) throw InvalidArgument("cache file has a bad sector size");
      Eigen::MatrixXd v(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(count));
      for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = r.f64();
      b.vectors.push_back(std::move(v));
    }
  }
  if (!r.at_end()) throw InvalidArgument("cache file has trailing data");
  return SpectrumTable(static_cast<int>(h.n_sites), h.hash, std::move(blocks), h.tolerance);
}

std::optional<SpectrumTable> try_load_spectrum(const std::filesystem::path& path, int n_sites,
                                               std::uint64_t model_hash) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  {
    Reader r(path);
    const Header h = read_header(r, path);
    if (static_cast<int>(h.n_sites) != n_sites || h.hash != model_hash) return std::nullopt;
  }
  return load_spectrum(path);
}

std::filesystem::path cache_path(const std::filesystem::path& dir, int n_sites, std::uint64_t model_hash) {
  return dir / fmt::format("spectrum_N{}_{:016x}.bin", n_sites, model_hash);
}

}  // namespace naeth
