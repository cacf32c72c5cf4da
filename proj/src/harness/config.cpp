#include "naeth/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "naeth/errors.hpp"

namespace naeth {

namespace {

using json = nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw InvalidArgument("config: '" + where + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw InvalidArgument("config: unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v);
  out = v;
}

HalfInteger read_half(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_string()) return HalfInteger::parse(v.get<std::string>());
  if (v.is_number()) return HalfInteger::parse(std::to_string(v.get<double>()));
  throw InvalidArgument(std::string("config: '") + key + "' must be a number or string like \"3/2\"");
}

std::vector<int> centered_sites(TensorKind kind, int n) {
  switch (kind) {
    case TensorKind::identity: return {};
    case TensorKind::dipole: return {n / 2};
    default: return {n / 2 - 1, n / 2};
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (sizes.empty()) throw InvalidArgument("config: 'sizes' is empty");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 2) throw InvalidArgument("config: sizes must be at least 2");
    if (sizes[i] > max_sites)
      throw InvalidArgument("config: size " + std::to_string(sizes[i]) + " exceeds max_sites " +
                            std::to_string(max_sites));
    if (i > 0 && sizes[i] <= sizes[i - 1])
      throw InvalidArgument("config: sizes must be strictly ascending");
  }
  if (threads < 1) throw InvalidArgument("config: threads must be positive");
  const std::set<std::string> presets{"default", "ferromagnetic", "uniform", "custom"};
  if (!presets.count(model.preset)) throw InvalidArgument("config: unknown model preset '" + model.preset + "'");
  if (model.preset == "custom" && sizes.size() != 1)
    throw InvalidArgument("config: a custom model fixes a single size");
  if (std::abs(op.q) > (op.kind == TensorKind::quadrupole ? 2 : op.kind == TensorKind::dipole ? 1 : 0))
    throw InvalidArgument("config: operator component q outside the rank");
  if (!(stats.bins.energy > 0.0) || !(stats.bins.spin > 0.0) || stats.bins.min_count < 2)
    throw InvalidArgument("config: bad bin widths");
  for (int n : sizes) {
    model_for(n).validate();
    operator_for(n);
  }
}

SpinModelSpec ExperimentConfig::model_for(int n) const {
  if (model.preset == "default") return SpinModelSpec::default_model(n, rng_seed);
  if (model.preset == "ferromagnetic") return SpinModelSpec::ferromagnetic(n);
  if (model.preset == "uniform") return SpinModelSpec::uniform(n, model.j1, model.j2, model.boundary);
  SpinModelSpec s;
  s.n_sites = n;
  s.nn_couplings = model.nn_couplings;
  s.nnn_couplings = model.nnn_couplings;
  s.boundary = model.boundary;
  s.rng_seed = rng_seed;
  s.validate();
  return s;
}

SphericalTensorFamily ExperimentConfig::operator_for(int n) const {
  return build_tensor(op.kind, op.sites.empty() ? centered_sites(op.kind, n) : op.sites, n);
}

StateRequest ExperimentConfig::state_request(const SpinModelSpec& spec) const {
  StateRequest r;
  r.kind = state.kind;
  r.spin_scale = state.spin_scale;
  r.energy_density = state.energy_density;
  r.m_bar = state.m_bar;
  r.label = state.label;
  r.m = state.m;
  r.magnetization_density = state.magnetization_density;
  r.brickwork_depth = state.brickwork_depth;
  r.model = &spec;
  r.brickwork_angle = state.brickwork_angle;
  r.brickwork_seed = rng_seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(spec.n_sites));
  return r;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  only_keys(j, "config",
            {"model", "sizes", "max_sites", "operator", "state", "ensemble", "stats", "output_dir",
             "cache_dir", "seed", "threads"});
  ExperimentConfig c;
  read(j, "sizes", c.sizes);
  read(j, "max_sites", c.max_sites);
  read(j, "seed", c.rng_seed);
  read(j, "threads", c.threads);
  std::string s;
  if (j.contains("output_dir")) {
    read(j, "output_dir", s);
    c.output_dir = s;
  }
  if (j.contains("cache_dir")) {
    read(j, "cache_dir", s);
    c.cache_dir = s;
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    only_keys(m, "model", {"preset", "j1", "j2", "boundary", "nn_couplings", "nnn_couplings"});
    read(m, "preset", c.model.preset);
    read(m, "j1", c.model.j1);
    read(m, "j2", c.model.j2);
    read(m, "nn_couplings", c.model.nn_couplings);
    read(m, "nnn_couplings", c.model.nnn_couplings);
    if (m.contains("boundary")) {
      std::string b;
      read(m, "boundary", b);
      c.model.boundary = boundary_from_string(b);
    }
    if (c.model.preset == "custom" && !j.contains("sizes"))
      c.sizes = {static_cast<int>(c.model.boundary == Boundary::periodic ? c.model.nn_couplings.size()
                                                                          : c.model.nn_couplings.size() + 1)};
  }
  if (j.contains("operator")) {
    const json& o = j.at("operator");
    only_keys(o, "operator", {"kind", "sites", "q"});
    std::string kind = "quadrupole";
    read(o, "kind", kind);
    c.op.kind = tensor_kind_from_string(kind);
    if (o.contains("sites") && !(o.at("sites").is_string() && o.at("sites") == "center"))
      read(o, "sites", c.op.sites);
    read(o, "q", c.op.q);
  }
  if (j.contains("state")) {
    const json& st = j.at("state");
    only_keys(st, "state",
              {"kind", "spin_scale", "energy_density", "m_bar", "magnetization_density",
               "brickwork_depth", "brickwork_angle", "label", "m"});
    std::string kind = "product";
    read(st, "kind", kind);
    c.state.kind = state_kind_from_string(kind);
    read(st, "spin_scale", c.state.spin_scale);
    read_opt(st, "energy_density", c.state.energy_density);
    if (st.contains("m_bar") && !st.at("m_bar").is_null()) c.state.m_bar = read_half(st, "m_bar");
    read(st, "magnetization_density", c.state.magnetization_density);
    read(st, "brickwork_depth", c.state.brickwork_depth);
    read(st, "brickwork_angle", c.state.brickwork_angle);
    read(st, "label", c.state.label);
    if (st.contains("m")) c.state.m = read_half(st, "m");
  }
  if (j.contains("ensemble")) {
    const json& e = j.at("ensemble");
    only_keys(e, "ensemble", {"energy_density", "magnetization_density"});
    read_opt(e, "energy_density", c.ensemble.energy_density);
    read(e, "magnetization_density", c.ensemble.magnetization_density);
  }
  if (j.contains("stats")) {
    const json& st = j.at("stats");
    only_keys(st, "stats",
              {"energy_bin", "spin_bin", "min_count", "offdiagonal", "offdiagonal_max_sites",
               "density_window"});
    read(st, "energy_bin", c.stats.bins.energy);
    read(st, "spin_bin", c.stats.bins.spin);
    read(st, "min_count", c.stats.bins.min_count);
    read(st, "offdiagonal", c.stats.offdiagonal);
    read(st, "offdiagonal_max_sites", c.stats.offdiagonal_max_sites);
    if (st.contains("density_window")) {
      std::vector<double> w;
      read(st, "density_window", w);
      if (w.size() != 2) throw InvalidArgument("config: density_window needs two numbers");
      c.stats.density_low = w[0];
      c.stats.density_high = w[1];
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace naeth
