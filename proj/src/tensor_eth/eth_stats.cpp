#include <algorithm>
#include <cmath>
#include <map>

#include "naeth/errors.hpp"
#include "naeth/tensor.hpp"

namespace naeth {

namespace {

void check_widths(const BinWidths& w) {
  if (!(w.energy > 0.0) || !(w.spin > 0.0))
    throw InvalidArgument("bin widths must be positive");
  if (w.min_count < 2) throw InvalidArgument("min_count must be at least 2");
}

struct Moments {
  int n = 0;
  double mu = 0.0, m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mu;
    mu += d / n;
    m2 += d * (x - mu);
  }
  double mean() const { return mu; }
  double variance() const { return n < 2 ? 0.0 : m2 / (n - 1); }
};

}  // namespace

double trace_energy(const SpectrumTable& table) {
  double num = 0.0, den = 0.0;
  for (const auto& mu : table.multiplets()) {
    const double g = mu.spin.twice() + 1.0;
    num += g * mu.energy;
    den += g;
  }
  return num / den;
}

DiagonalFit eth_diagonal_fit(const DiagonalReducedElements& r, const SpectrumTable& table,
                             const BinWidths& widths) {
  check_widths(widths);
  if (r.value.size() != table.size())
    throw InvalidArgument("eth_diagonal_fit: element count does not match the spectrum");
  DiagonalFit fit;
  fit.n_sites = table.n_sites();
  fit.widths = widths;
  fit.energy_origin = table.min_energy();
  fit.residuals.assign(table.size(), std::nullopt);
  fit.bin_of_label.assign(table.size(), std::nullopt);

  std::map<std::pair<int, int>, std::vector<int>> members;
  for (const auto& mu : table.multiplets()) {
    if (!r.value[mu.label]) continue;
    const int ie = static_cast<int>(std::floor((mu.energy - fit.energy_origin) / widths.energy));
    const int is = static_cast<int>(std::floor(mu.spin.value() / widths.spin));
    members[{ie, is}].push_back(mu.label);
  }
  for (const auto& [key, labels] : members) {
    DiagonalBin bin;
    bin.ie = key.first;
    bin.is = key.second;
    bin.energy_center = fit.energy_origin + (bin.ie + 0.5) * widths.energy;
    bin.spin_low = bin.is * widths.spin;
    Moments m;
    for (int l : labels) m.add(*r.value[l]);
    bin.count = m.n;
    bin.mean = m.mean();
    bin.stddev = std::sqrt(m.variance());
    bin.std_error = bin.stddev / std::sqrt(static_cast<double>(m.n));
    bin.defined = m.n >= widths.min_count;
    if (bin.defined)
      for (int l : labels) {
        fit.residuals[l] = *r.value[l] - bin.mean;
        fit.bin_of_label[l] = key;
      }
    fit.bins.push_back(bin);
  }
  return fit;
}

std::optional<double> DiagonalFit::pooled_stddev_at(double energy) const {
  const int ie = static_cast<int>(std::floor((energy - energy_origin) / widths.energy));
  double num = 0.0;
  int dof = 0, total = 0;
  for (const auto& b : bins) {
    if (b.ie != ie || b.count < 2) continue;
    num += (b.count - 1) * b.stddev * b.stddev;
    dof += b.count - 1;
    total += b.count;
  }
  if (total < widths.min_count || dof == 0) return std::nullopt;
  return std::sqrt(num / dof);
}

OffDiagonalStats eth_offdiagonal_stats(const ReducedElementTable& r, const SpectrumTable& table,
                                       const EntropySurface& entropy, const BinWidths& widths) {
  check_widths(widths);
  OffDiagonalStats out;
  std::map<std::pair<int, int>, std::vector<std::size_t>> members;
  for (const auto& pb : r.blocks()) {
    if (!pb.defined) continue;
    const SpinBlock& rb = table.blocks()[pb.row_block];
    const SpinBlock& cb = table.blocks()[pb.col_block];
    for (int i = 0; i < rb.count(); ++i)
      for (int j = 0; j < cb.count(); ++j) {
        const int alpha = rb.first_label + i, beta = cb.first_label + j;
        if (alpha >= beta) continue;
        OffDiagonalSample s;
        s.alpha = alpha;
        s.beta = beta;
        s.mean_energy = 0.5 * (rb.energies[i] + cb.energies[j]);
        s.omega = rb.energies[i] - cb.energies[j];
        s.mean_spin = 0.5 * (rb.spin.value() + cb.spin.value());
        s.nu = rb.spin.value() - cb.spin.value();
        const double v = pb.value(i, j);
        out.max_abs_element = std::max(out.max_abs_element, std::abs(v));
        const auto st = entropy.entropy_at(s.mean_energy, s.mean_spin);
        if (!st) {
          ++out.skipped_undefined_entropy;
          continue;
        }
        s.scaled = v * std::exp(0.5 * *st);
        const int iw = static_cast<int>(std::floor(s.omega / widths.energy));
        const int tnu = rb.spin.twice() - cb.spin.twice();
        members[{iw, tnu}].push_back(out.samples.size());
        out.samples.push_back(s);
      }
  }
  Moments pooled;
  for (const auto& [key, idx] : members) {
    OffDiagonalBin bin;
    bin.i_omega = key.first;
    bin.twice_nu = key.second;
    bin.count = static_cast<int>(idx.size());
    double abs_sum = 0.0, sq_sum = 0.0;
    for (auto i : idx) {
      abs_sum += std::abs(out.samples[i].scaled);
      sq_sum += out.samples[i].scaled * out.samples[i].scaled;
    }
    bin.mean_abs = abs_sum / bin.count;
    bin.rms = std::sqrt(sq_sum / bin.count);
    Moments m;
    for (auto i : idx) {
      auto& s = out.samples[i];
      s.normalized = bin.rms > 0.0 ? s.scaled / bin.rms : 0.0;
      m.add(s.normalized);
      if (bin.count >= widths.min_count) pooled.add(s.normalized);
    }
    bin.residual_mean = m.mean();
    bin.residual_variance = m.variance();
    out.bins.push_back(bin);
  }
  if (pooled.n > 0) {
    out.residual_mean = pooled.mean();
    out.residual_variance = pooled.variance();
  }
  return out;
}

SpinDensitySlope spin_density_slope(const std::vector<SizedDiagonal>& sizes, double density_low,
                                    double density_high) {
  if (!(density_low < density_high)) throw InvalidArgument("spin_density_slope: empty window");
  std::vector<double> x, y;
  for (const auto& sz : sizes) {
    if (!sz.table || !sz.elements) throw InvalidArgument("spin_density_slope: null input");
    const double n = sz.table->n_sites();
    for (const auto& mu : sz.table->multiplets()) {
      const double e = mu.energy / n;
      const auto& v = sz.elements->value[mu.label];
      if (e < density_low || e > density_high || !v) continue;
      x.push_back(mu.spin.value() / n);
      y.push_back(*v);
    }
  }
  if (x.size() < 3) throw InvalidArgument("spin_density_slope: fewer than three multiplets in window");
  SpinDensitySlope out;
  out.fit = least_squares(x, y);
  out.samples = static_cast<int>(x.size());
  constexpr double z = 1.959963984540054;
  out.slope_ci_low = out.fit.slope - z * out.fit.slope_stderr;
  out.slope_ci_high = out.fit.slope + z * out.fit.slope_stderr;
  out.intercept_ci_low = out.fit.intercept - z * out.fit.intercept_stderr;
  out.intercept_ci_high = out.fit.intercept + z * out.fit.intercept_stderr;
  return out;
}

}  // namespace naeth
