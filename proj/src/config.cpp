#include "spinclock/config.hpp"

#include "spinclock/dicke.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string_view>

namespace spinclock {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, value] : node_.items()) {
      bool known = false;
      for (auto k : keys) known = known || key == k;
      if (!known) fail(join(key), "unknown key");
    }
  }

  bool has(std::string_view key) const { return node_.contains(std::string(key)); }

  double number(std::string_view key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(std::string(key));
    if (!v.is_number()) fail(join(key), "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(std::string_view key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(std::string(key));
    if (!v.is_number_integer()) fail(join(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(std::string(key));
    if (!v.is_number_unsigned()) fail(join(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(std::string(key));
    if (!v.is_boolean()) fail(join(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(std::string_view key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(std::string(key));
    if (!v.is_string()) fail(join(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(std::string_view key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(std::string(key));
    if (!v.is_array()) fail(join(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(join(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Section child(std::string_view key) const {
    static const json empty = json::object();
    return has(key) ? Section(node_.at(std::string(key)), join(key)) : Section(empty, join(key));
  }

  std::string join(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

 private:
  const json& node_;
  std::string path_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

ContrastDecayShape shape_from_string(const std::string& s, const std::string& field) {
  if (s == "exponential") return ContrastDecayShape::exponential;
  if (s == "gaussian") return ContrastDecayShape::gaussian;
  throw ConfigError(field + ": expected \"exponential\" or \"gaussian\"");
}

std::string to_string(ContrastDecayShape s) {
  return s == ContrastDecayShape::exponential ? "exponential" : "gaussian";
}

GridSpec read_grid(const Section& s, const GridSpec& fallback) {
  s.allow({"start_s", "stop_s", "points"});
  GridSpec g;
  g.start_s = s.number("start_s", fallback.start_s);
  g.stop_s = s.number("stop_s", fallback.stop_s);
  const auto points = s.integer("points", fallback.points);
  require(points >= 2 && points <= 100000, s.join("points"), "must lie in [2, 100000]");
  g.points = static_cast<int>(points);
  require(g.start_s >= 0, s.join("start_s"), "must be >= 0");
  require(g.stop_s > g.start_s, s.join("stop_s"), "must exceed start_s");
  return g;
}

json grid_json(const GridSpec& g) {
  return {{"start_s", g.start_s}, {"stop_s", g.stop_s}, {"points", g.points}};
}

}  // namespace

std::vector<double> GridSpec::values() const {
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    v[static_cast<std::size_t>(i)] = start_s + (stop_s - start_s) * i / (points - 1);
  return v;
}

PresetParams ExperimentConfig::preset_params() const {
  PresetParams p;
  p.s0 = atoms_2s0 / 2;
  p.c_in = c_in;
  p.squeeze = calibrated_squeeze(squeezing.target_zeta, squeezing.excess_area,
                                 squeezing.contrast_factor);
  return p;
}

ClockConfig ExperimentConfig::clock_config(InputState input) const {
  ClockConfig c;
  c.omega0 = clock.omega0;
  c.t_r = clock.t_r;
  c.t_cycle = clock.t_cycle;
  c.n_cycles = clock.n_cycles;
  c.input_state = input;
  c.s0 = clock.atoms_2s0 / 2;
  c.noise = noise;
  c.noise.var_omega = clock.var_omega;
  c.noise.t_coh = clock.t_coh;
  c.noise.readout_var = clock.readout_var;
  c.noise.drift = clock.drift;
  c.contrast_at_readout = clock.contrast_at_readout;
  if (input == InputState::css) {
    c.contrast = clock.css_contrast;
  } else {
    c.contrast = clock.squeezed_c_in;
    c.squeeze = clock_squeeze(clock.zeta_net, clock.squeezed_c_in, clock.squeezed_excess_area,
                              clock.squeezed_contrast_factor);
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what());
  }
  ExperimentConfig cfg;
  const Section top(root, "");
  top.allow({"master_seed", "output_dir", "ensemble", "squeezing", "noise", "lifetime", "clock",
             "oracle"});
  cfg.master_seed = top.unsigned_integer("master_seed", cfg.master_seed);
  cfg.output_dir = top.string("output_dir", cfg.output_dir);

  {
    const auto s = top.child("ensemble");
    s.allow({"atoms_2s0", "c_in"});
    cfg.atoms_2s0 = s.number("atoms_2s0", cfg.atoms_2s0);
    cfg.c_in = s.number("c_in", cfg.c_in);
    require(cfg.atoms_2s0 > 0, s.join("atoms_2s0"), "must be > 0");
    require(cfg.c_in > 0 && cfg.c_in <= 1, s.join("c_in"), "must lie in (0, 1]");
  }
  {
    const auto s = top.child("squeezing");
    s.allow({"target_zeta", "excess_area_v0", "shear_contrast_factor"});
    auto& q = cfg.squeezing;
    q.target_zeta = s.number("target_zeta", q.target_zeta);
    q.excess_area = s.number("excess_area_v0", q.excess_area);
    q.contrast_factor = s.number("shear_contrast_factor", q.contrast_factor);
    require(q.target_zeta > 0, s.join("target_zeta"), "must be > 0");
    require(q.excess_area >= 0, s.join("excess_area_v0"), "must be >= 0");
    require(q.contrast_factor > 0 && q.contrast_factor * cfg.c_in <= 1,
            s.join("shear_contrast_factor"), "must be > 0 and keep the contrast <= 1");
  }
  {
    const auto s = top.child("noise");
    s.allow({"var_omega_rad2_per_s2", "t_coh_s", "contrast_decay_shape", "readout_var_spin2",
             "field_coeff_hz_per_g"});
    auto& n = cfg.noise;
    n.var_omega = s.number("var_omega_rad2_per_s2", n.var_omega);
    n.t_coh = s.number("t_coh_s", n.t_coh);
    n.decay_shape = shape_from_string(s.string("contrast_decay_shape", to_string(n.decay_shape)),
                                      s.join("contrast_decay_shape"));
    n.readout_var = s.number("readout_var_spin2", n.readout_var);
    n.field_coeff = s.number("field_coeff_hz_per_g", n.field_coeff);
    require(n.var_omega >= 0, s.join("var_omega_rad2_per_s2"), "must be >= 0");
    require(n.t_coh > 0, s.join("t_coh_s"), "must be > 0");
    require(n.readout_var >= 0, s.join("readout_var_spin2"), "must be >= 0");
  }
  {
    const auto s = top.child("lifetime");
    s.allow({"n_shots", "subtract_readout", "grids"});
    auto& l = cfg.lifetime;
    l.n_shots = s.integer("n_shots", l.n_shots);
    require(l.n_shots >= 2, s.join("n_shots"), "must be >= 2");
    l.subtract_readout = s.boolean("subtract_readout", l.subtract_readout);
    const auto grids = s.child("grids");
    grids.allow({"css_ramsey", "phase_squeezed_ramsey", "number_squeezed_hold", "echo_ramsey"});
    for (auto kind : kAllPresets) {
      auto& g = l.grids[static_cast<std::size_t>(kind)];
      g = read_grid(grids.child(to_string(kind)), g);
    }
  }
  {
    const auto s = top.child("clock");
    s.allow({"omega0_rad_per_s", "t_r_s", "t_cycle_s", "n_cycles", "atoms_2s0",
             "var_omega_rad2_per_s2", "t_coh_s", "readout_var_spin2", "css_contrast",
             "contrast_at_readout", "squeezed",
             "drift", "taus_s"});
    auto& c = cfg.clock;
    c.omega0 = s.number("omega0_rad_per_s", c.omega0);
    c.t_r = s.number("t_r_s", c.t_r);
    c.t_cycle = s.number("t_cycle_s", c.t_cycle);
    c.n_cycles = s.integer("n_cycles", c.n_cycles);
    c.atoms_2s0 = s.number("atoms_2s0", c.atoms_2s0);
    c.var_omega = s.number("var_omega_rad2_per_s2", c.var_omega);
    c.t_coh = s.number("t_coh_s", c.t_coh);
    c.readout_var = s.number("readout_var_spin2", c.readout_var);
    c.css_contrast = s.number("css_contrast", c.css_contrast);
    c.contrast_at_readout = s.boolean("contrast_at_readout", c.contrast_at_readout);
    c.taus_s = s.numbers("taus_s", c.taus_s);
    require(c.omega0 > 0, s.join("omega0_rad_per_s"), "must be > 0");
    require(c.t_r > 0, s.join("t_r_s"), "must be > 0");
    require(c.t_cycle >= c.t_r, s.join("t_cycle_s"), "must be >= t_r_s");
    require(c.n_cycles >= 2, s.join("n_cycles"), "must be >= 2");
    require(c.atoms_2s0 > 0, s.join("atoms_2s0"), "must be > 0");
    require(c.var_omega >= 0, s.join("var_omega_rad2_per_s2"), "must be >= 0");
    require(c.t_coh > 0, s.join("t_coh_s"), "must be > 0");
    require(c.readout_var >= 0, s.join("readout_var_spin2"), "must be >= 0");
    require(c.css_contrast > 0 && c.css_contrast <= 1, s.join("css_contrast"),
            "must lie in (0, 1]");

    const auto sq = s.child("squeezed");
    sq.allow({"c_in", "shear_contrast_factor", "zeta_net", "excess_area_v0"});
    c.squeezed_c_in = sq.number("c_in", c.squeezed_c_in);
    c.squeezed_contrast_factor = sq.number("shear_contrast_factor", c.squeezed_contrast_factor);
    c.zeta_net = sq.number("zeta_net", c.zeta_net);
    c.squeezed_excess_area = sq.number("excess_area_v0", c.squeezed_excess_area);
    require(c.squeezed_c_in > 0 && c.squeezed_c_in <= 1, sq.join("c_in"), "must lie in (0, 1]");
    require(c.squeezed_contrast_factor > 0 && c.squeezed_contrast_factor * c.squeezed_c_in <= 1,
            sq.join("shear_contrast_factor"), "must be > 0 and keep the contrast <= 1");
    require(c.zeta_net > 0, sq.join("zeta_net"), "must be > 0");
    require(c.squeezed_excess_area >= 0, sq.join("excess_area_v0"), "must be >= 0");

    const auto d = s.child("drift");
    d.allow({"enabled", "amplitude_hz", "amplitude_g", "correlation_time_s"});
    c.drift.enabled = d.boolean("enabled", c.drift.enabled);
    require(!(d.has("amplitude_hz") && d.has("amplitude_g")), d.join("amplitude_g"),
            "give either amplitude_hz or amplitude_g, not both");
    if (d.has("amplitude_g")) {
      c.drift.units = DriftModel::Units::field;
      c.drift.amplitude = d.number("amplitude_g", 0.0);
    } else {
      c.drift.units = DriftModel::Units::frequency;
      c.drift.amplitude = d.number("amplitude_hz", c.drift.amplitude);
    }
    c.drift.correlation_time_s = d.number("correlation_time_s", c.drift.correlation_time_s);
    require(c.drift.amplitude >= 0, d.join("amplitude"), "must be >= 0");
    require(c.drift.correlation_time_s > 0, d.join("correlation_time_s"), "must be > 0");
  }
  {
    const auto s = top.child("oracle");
    s.allow({"spins", "q_eff_max", "q_eff_points", "tolerance_rel", "breakdown_q_eff"});
    auto& o = cfg.oracle;
    o.spins = s.numbers("spins", o.spins);
    o.q_eff_max = s.number("q_eff_max", o.q_eff_max);
    o.q_eff_points = static_cast<int>(s.integer("q_eff_points", o.q_eff_points));
    o.tolerance_rel = s.number("tolerance_rel", o.tolerance_rel);
    o.breakdown_q_eff = s.number("breakdown_q_eff", o.breakdown_q_eff);
    require(!o.spins.empty(), s.join("spins"), "must not be empty");
    for (double spin : o.spins) {
      const double twice = 2 * spin;
      require(spin >= 0.5 && twice == std::floor(twice), s.join("spins"),
              "entries must be positive half-integers");
      require(spin <= kMaxTwoSpin / 2, s.join("spins"), "entries must not exceed 2000");
    }
    require(o.q_eff_max > 0, s.join("q_eff_max"), "must be > 0");
    require(o.q_eff_points >= 1, s.join("q_eff_points"), "must be >= 1");
    require(o.tolerance_rel > 0, s.join("tolerance_rel"), "must be > 0");
    require(o.breakdown_q_eff >= 0, s.join("breakdown_q_eff"), "must be >= 0");
  }

  try {
    (void)cfg.preset_params();
    (void)cfg.clock_config(InputState::squeezed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("squeezing: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& cfg) {
  json grids = json::object();
  for (auto kind : kAllPresets)
    grids[std::string(to_string(kind))] = grid_json(cfg.lifetime.grid(kind));
  const auto& c = cfg.clock;
  json drift = {{"enabled", c.drift.enabled}, {"correlation_time_s", c.drift.correlation_time_s}};
  drift[c.drift.units == DriftModel::Units::field ? "amplitude_g" : "amplitude_hz"] =
      c.drift.amplitude;
  return {
      {"master_seed", cfg.master_seed},
      {"output_dir", cfg.output_dir},
      {"ensemble", {{"atoms_2s0", cfg.atoms_2s0}, {"c_in", cfg.c_in}}},
      {"squeezing",
       {{"target_zeta", cfg.squeezing.target_zeta},
        {"excess_area_v0", cfg.squeezing.excess_area},
        {"shear_contrast_factor", cfg.squeezing.contrast_factor}}},
      {"noise",
       {{"var_omega_rad2_per_s2", cfg.noise.var_omega},
        {"t_coh_s", cfg.noise.t_coh},
        {"contrast_decay_shape", to_string(cfg.noise.decay_shape)},
        {"readout_var_spin2", cfg.noise.readout_var},
        {"field_coeff_hz_per_g", cfg.noise.field_coeff}}},
      {"lifetime",
       {{"n_shots", cfg.lifetime.n_shots},
        {"subtract_readout", cfg.lifetime.subtract_readout},
        {"grids", grids}}},
      {"clock",
       {{"omega0_rad_per_s", c.omega0},
        {"t_r_s", c.t_r},
        {"t_cycle_s", c.t_cycle},
        {"n_cycles", c.n_cycles},
        {"atoms_2s0", c.atoms_2s0},
        {"var_omega_rad2_per_s2", c.var_omega},
        {"t_coh_s", c.t_coh},
        {"readout_var_spin2", c.readout_var},
        {"css_contrast", c.css_contrast},
        {"contrast_at_readout", c.contrast_at_readout},
        {"squeezed",
         {{"c_in", c.squeezed_c_in},
          {"shear_contrast_factor", c.squeezed_contrast_factor},
          {"zeta_net", c.zeta_net},
          {"excess_area_v0", c.squeezed_excess_area}}},
        {"drift", drift},
        {"taus_s", c.taus_s}}},
      {"oracle",
       {{"spins", cfg.oracle.spins},
        {"q_eff_max", cfg.oracle.q_eff_max},
        {"q_eff_points", cfg.oracle.q_eff_points},
        {"tolerance_rel", cfg.oracle.tolerance_rel},
        {"breakdown_q_eff", cfg.oracle.breakdown_q_eff}}},
  };
}

}  // namespace spinclock
