#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "naeth/ensembles.hpp"
#include "naeth/model.hpp"
#include "naeth/tensor.hpp"

namespace naeth {

/// How the chain is generated at each size.
struct ModelConfig {
  std::string preset = "default";  // default | ferromagnetic | uniform | custom
  double j1 = 1.0, j2 = 0.0;
  Boundary boundary = Boundary::open;
  std::vector<double> nn_couplings, nnn_couplings;  // custom only
};

struct OperatorConfig {
  TensorKind kind = TensorKind::quadrupole;
  /// Empty means centered on the chain.
  std::vector<int> sites;
  int q = 0;
};

struct StateConfig {
  StateKind kind = StateKind::product;
  double spin_scale = 1.0;
  std::optional<double> energy_density;
  std::optional<HalfInteger> m_bar;
  double magnetization_density = 0.0;
  int brickwork_depth = 0;
  double brickwork_angle = 0.2;
  int label = 0;
  HalfInteger m;
};

struct EnsembleConfig {
  std::optional<double> energy_density;  // default Tr(H)/(N 2^N)
  double magnetization_density = 0.0;
};

struct StatsConfig {
  BinWidths bins;
  bool offdiagonal = true;
  int offdiagonal_max_sites = 12;
  double density_low = -1e300, density_high = 1e300;
};

struct ExperimentConfig {
  ModelConfig model;
  std::vector<int> sizes{8, 10, 12};
  int max_sites = 14;
  OperatorConfig op;
  StateConfig state;
  EnsembleConfig ensemble;
  StatsConfig stats;
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_dir;  // empty disables caching
  std::uint64_t rng_seed = 1234;
  int threads = 1;

  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
  SpinModelSpec model_for(int n_sites) const;
  SphericalTensorFamily operator_for(int n_sites) const;
  StateRequest state_request(const SpinModelSpec& model) const;
};

/// Parses the JSON config format documented in the README. Unknown keys are
/// rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace naeth
