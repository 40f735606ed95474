#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinclock/commands.hpp"
#include "spinclock/config.hpp"

using namespace spinclock;
using doctest::Approx;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.lifetime.n_shots = 400;
  for (auto& g : c.lifetime.grids) g.points = 4;
  c.clock.n_cycles = 400;
  c.oracle.spins = {10.0};
  return c;
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
  const auto c = parse_config("{}");
  CHECK(c.master_seed == 20101);
  CHECK(c.atoms_2s0 == 3e4);
  CHECK(c.noise.var_omega == Approx(std::pow(2 * M_PI * 1.3, 2)));
  CHECK(c.clock.drift.enabled);
  const auto p = c.preset_params();
  CHECK(p.s0 == 1.5e4);
  CHECK(p.c_in == 0.9);
  const auto sq = c.clock_config(InputState::squeezed);
  CHECK(sq.s0 == 1.75e4);
  CHECK(sq.contrast == 0.9);
  CHECK(sq.squeeze.contrast_factor == 0.9);
  CHECK(sq.noise.var_omega == 0.0);
  CHECK(c.clock_config(InputState::css).contrast == 1.0);
}

TEST_CASE("config parsing with comments and overrides") {
  const auto c = parse_config(R"({
    // comments are allowed
    "master_seed": 7,
    "ensemble": {"atoms_2s0": 1000, "c_in": 0.8},
    "noise": {"t_coh_s": 0.02, "contrast_decay_shape": "gaussian"},
    "lifetime": {"n_shots": 50, "grids": {"echo_ramsey": {"stop_s": 0.001, "points": 3}}},
    /* block comment */
    "clock": {"drift": {"enabled": false, "amplitude_g": 1e-4}, "taus_s": [9, 18]},
    "oracle": {"spins": [2.5, 4]}
  })");
  CHECK(c.master_seed == 7);
  CHECK(c.c_in == 0.8);
  CHECK(c.noise.decay_shape == ContrastDecayShape::gaussian);
  CHECK(c.lifetime.grid(PresetKind::echo_ramsey).values() ==
        std::vector<double>{0.0, 0.0005, 0.001});
  CHECK(c.clock.drift.units == DriftModel::Units::field);
  CHECK(c.clock.taus_s.size() == 2);

  // round trip through the resolved form
  const auto again = parse_config(to_json(c).dump());
  CHECK(to_json(again) == to_json(c));
}

TEST_CASE("config errors name the field") {
  CHECK(config_error(R"({"bogus": 1})").find("bogus") != std::string::npos);
  CHECK(config_error(R"({"noise": {"t_coh": 1}})").find("noise.t_coh") != std::string::npos);
  CHECK(config_error(R"({"noise": {"t_coh_s": -1}})").find("noise.t_coh_s") != std::string::npos);
  CHECK(config_error(R"({"ensemble": {"c_in": "high"}})").find("ensemble.c_in") != std::string::npos);
  CHECK(config_error(R"({"lifetime": {"grids": {"css_ramsey": {"points": 1}}}})")
            .find("lifetime.grids.css_ramsey.points") != std::string::npos);
  CHECK(config_error(R"({"clock": {"t_r_s": 10, "t_cycle_s": 9}})").find("clock.t_cycle_s") !=
        std::string::npos);
  CHECK(config_error(R"({"oracle": {"spins": [3000]}})").find("oracle.spins") != std::string::npos);
  CHECK(config_error(R"({"oracle": {"spins": [2.3]}})").find("oracle.spins") != std::string::npos);
  CHECK(config_error(R"({"squeezing": {"target_zeta": 3}})").find("squeezing") != std::string::npos);
  CHECK(config_error(R"({"clock": {"drift": {"amplitude_hz": 1, "amplitude_g": 1}}})") != "");
  CHECK(config_error(R"({"noise": {"contrast_decay_shape": "linear"}})") != "");
  CHECK(config_error("{ \"master_seed\": -3 }").find("master_seed") != std::string::npos);
  CHECK(config_error("{ not json").find("syntax") != std::string::npos);
  CHECK(config_error("[1, 2]") != "");
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("lifetime fit recovers an exact quadratic") {
  std::vector<LifetimePoint> pts;
  for (int i = 0; i < 10; ++i) {
    const double t = i * 1e-4;
    pts.push_back({PresetKind::css_ramsey, t, 1.0 + 2e6 * t * t, 0.01 * (1 + i), 0.9,
                   1.0 + 2e6 * t * t});
  }
  const auto f = fit_lifetime(PresetKind::css_ramsey, pts, 1.5e4, 0.9);
  CHECK(f.zeta0 == Approx(1.0));
  CHECK(f.curvature == Approx(2e6));
  CHECK(f.var_omega == Approx(2e6 / (3e4 * 0.9)));
  CHECK(f.t_equal == Approx(std::sqrt(1.0 / 2e6)));
  REQUIRE(f.t_cross_double);
  CHECK(*f.t_cross_double == Approx(std::sqrt(1.0 / 2e6)).epsilon(0.05));
  CHECK(!f.t_cross_one);

  CHECK(first_crossing({0, 1, 2}, {0, 2, 4}, 1.0) == Approx(0.5));
  CHECK(!first_crossing({0, 1}, {3, 4}, 1.0));
}

TEST_CASE("command outputs are byte identical across thread counts") {
  const auto cfg = small_config();
  const auto root = std::filesystem::temp_directory_path() / "spinclock_unit_outputs";
  std::filesystem::remove_all(root);
  for (int threads : {1, 4, 16}) {
    const auto dir = root / std::to_string(threads);
    write_lifetime(dir, cfg, compute_lifetime(cfg, threads));
    write_allan(dir, cfg, compute_allan(cfg, threads));
    write_oracle(dir, cfg, compute_oracle_check(cfg, threads));
    write_selftest(dir, cfg, compute_noise_selftest(cfg));
  }
  for (const char* name :
       {"lifetime.csv", "lifetime_fit.csv", "allan.csv", "oracle.csv", "noise_selftest.csv"}) {
    const auto one = slurp(root / "1" / name);
    CAPTURE(name);
    CHECK(!one.empty());
    CHECK(one == slurp(root / "4" / name));
    CHECK(one == slurp(root / "16" / name));
  }
  const auto lifetime = slurp(root / "1" / "lifetime.csv");
  CHECK(lifetime.find("# spinclock ") == 0);
  CHECK(lifetime.find("# config: {") != std::string::npos);
  CHECK(lifetime.find("readout_subtraction=on") != std::string::npos);
  CHECK(lifetime.find("\npreset,t_r_s,zeta,zeta_stderr,contrast\n") != std::string::npos);
  CHECK(slurp(root / "1" / "allan.csv").find("\ninput_state,tau_s,sigma,ci_lo,ci_hi\n") !=
        std::string::npos);
  std::filesystem::remove_all(root);
}

TEST_CASE("oracle check report") {
  ExperimentConfig cfg;
  cfg.oracle.spins = {25.0};
  const auto r = compute_oracle_check(cfg);
  CHECK(r.passed);
  CHECK(r.max_discrepancy < 0.05);
  CHECK(r.max_zero_mu_error < 1e-9);
  CHECK(r.breakdown_discrepancy > 0.05);
  cfg.oracle.tolerance_rel = 1e-4;
  CHECK(!compute_oracle_check(cfg).passed);
}

TEST_CASE("number format") {
  CHECK(format_number(1.0) == "1.00000000e+00");
  CHECK(format_number(-2.5e-10) == "-2.50000000e-10");
}
