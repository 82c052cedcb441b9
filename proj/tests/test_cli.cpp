#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "perhom/pipeline.hpp"
#include "perhom/serialization.hpp"
#include "test_support.hpp"

using namespace perhom;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("perhom_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("field binary and JSON round trips") {
  const GridPtr g = make_grid(2, 8);
  const PeriodicField u = test::random_field(g, 2, 3, 5, 0.0, true);
  std::stringstream ss;
  write_field(ss, u);
  CHECK(ss.str().size() == 12 + 2 * 64 * 16);
  const PeriodicField v = read_field(ss);
  CHECK((u.coeffs() - v.coeffs()).norm() == 0.0);
  CHECK((field_from_json(field_to_json(u)).coeffs() - u.coeffs()).norm() == 0.0);
  std::stringstream bad("xyz");
  CHECK_THROWS(read_field(bad));
}

TEST_CASE("ensemble round trip") {
  const GridPtr g = make_grid(1, 16);
  SimConfig cfg;
  cfg.x0 = Eigen::VectorXd::Constant(1, 0.1);
  cfg.T = 0.1;
  cfg.dt = 1e-3;
  cfg.paths = 10;
  cfg.checkpoints = 3;
  cfg.observable = PeriodicField::constant(g, 1.0);
  const TrajectoryEnsemble a = simulate_paths(cfg, SphericalMeasure::fractional_laplacian(1.5, 1),
                                              test::random_field(g, 1, 3, 1));
  std::stringstream ss;
  write_ensemble(ss, a);
  const TrajectoryEnsemble b = read_ensemble(ss);
  CHECK(b.paths == a.paths);
  CHECK(b.checkpoints == a.checkpoints);
  CHECK(b.times == a.times);
  CHECK(b.drift_integral == a.drift_integral);
  CHECK(b.levy == a.levy);
  CHECK(b.observable == a.observable);
  CHECK(b.seed == a.seed);
  std::string raw = ss.str();
  std::stringstream again;
  write_ensemble(again, a);
  raw = again.str();
  raw[0] = 'X';
  std::stringstream corrupt(raw);
  CHECK_THROWS(read_ensemble(corrupt));
}

TEST_CASE("measure and drift JSON round trips") {
  const auto m = SphericalMeasure::atomic(
      1.7, {{Eigen::Vector2d(1.0, 0.0), 0.5}, {Eigen::Vector2d(-1.0, 0.0), 0.5}, {Eigen::Vector2d(0.0, 1.0), 2.0},
            {Eigen::Vector2d(0.0, -1.0), 2.0}});
  const SphericalMeasure back = measure_from_json(measure_to_json(m), 2);
  const Eigen::Vector2d z(1.0, 2.0);
  CHECK(symbol(back, z) == doctest::Approx(symbol(m, z)).epsilon(1e-14));
  DriftSpec s;
  s.kind = DriftSpec::Kind::gradient_of;
  s.dim = 2;
  s.terms.push_back({{1, -2, 0}, 0, 0.3, -0.1});
  const DriftSpec t = drift_spec_from_json(drift_spec_to_json(s), 2);
  const GridPtr g = make_grid(2, 8);
  CHECK(l2_norm(build_drift(s, g) - build_drift(t, g)) == 0.0);
  CHECK_THROWS(drift_spec_from_json(json{{"kind", "bogus"}}, 1));
}

TEST_CASE("content hash is the git blob hash") {
  CHECK(content_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(content_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("admissibility names the violated inequality") {
  CHECK_FALSE(admissibility_violation(2.0, -0.1).has_value());
  CHECK_FALSE(admissibility_violation(1.5, -0.3).has_value());
  const auto v = admissibility_violation(1.2, -0.9);
  REQUIRE(v.has_value());
  CHECK(v->find("(2-2alpha)/3") != std::string::npos);
  CHECK(admissibility_violation(1.0, -0.1).has_value());
  CHECK(admissibility_violation(2.5, -0.1).has_value());
  CHECK(admissibility_violation(2.0, 0.1)->find("beta") != std::string::npos);
}

TEST_CASE("config parsing rejects unknown keys and wrong types") {
  const json ok = {{"dimension", 1}, {"N", 32}, {"alpha", 2.0}, {"beta", -0.1},
                   {"drift", {{"kind", "fourier_list"}, {"terms", json::array()}}}};
  const ExperimentConfig c = parse_config(ok);
  CHECK(c.N == 32);
  CHECK_FALSE(c.gamma.has_value());
  json j = ok;
  j["bogus"] = 1;
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("bogus"), std::invalid_argument);
  j = ok;
  j["mc"] = {{"paths", "many"}};
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("mc.paths"), std::invalid_argument);
  j = ok;
  j["N"] = 48;
  CHECK_THROWS_AS(parse_config(j), std::invalid_argument);
  j = ok;
  j["alpha"] = 1.2;
  j["beta"] = -0.9;
  CHECK_THROWS_WITH_AS(parse_config(j), doctest::Contains("(2-2alpha)/3"), std::invalid_argument);
  const ExperimentConfig r = parse_config(config_to_json(c));
  CHECK(r.N == c.N);
  CHECK(r.beta == c.beta);
}

TEST_CASE("zero-drift pipeline gives identity diffusivity and zero corrector") {
  ExperimentConfig cfg = parse_config(json{{"dimension", 1}, {"N", 32}, {"alpha", 2.0}, {"beta", -0.1},
                                           {"drift", {{"kind", "fourier_list"}, {"terms", json::array()}}},
                                           {"mc", {{"paths", 2000}, {"n", {4}}, {"t", 0.5}, {"batches", 30}}},
                                           {"pde", {{"steps", 256}}}});
  cfg.out = scratch("zero").string();
  const PipelineResult r = run_pipeline(cfg);
  CHECK(r.pass);
  CHECK(r.report["stages"]["diffusivity"]["D"][0][0].get<double>() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(r.report["stages"]["corrector"]["l2_pi_norm"].get<double>() == 0.0);
  const PeriodicField chi = load_field((std::filesystem::path(cfg.out) / "fields" / "chi.bin").string());
  CHECK(l2_norm(chi) == 0.0);
  CHECK(std::filesystem::exists(std::filesystem::path(cfg.out) / "tables" / "pde.csv"));
  CHECK(r.report["input_hash"].get<std::string>().size() == 40);
}

TEST_CASE("homogenization experiment refuses a drift with nonzero pi-mean") {
  const GridPtr g = make_grid(1, 16);
  PeriodicField F = PeriodicField::constant(g, 0.3);
  EffectiveModel model;
  model.D = Eigen::MatrixXd::Identity(1, 1);
  model.mean_F = Eigen::VectorXd::Constant(1, 0.3);
  CHECK_THROWS_AS(pde_homogenization_experiment(F, SphericalMeasure::fractional_laplacian(2.0, 1), -0.1, 0.0, model,
                                                PdeSettings{}, 1e-8),
                  std::invalid_argument);
}
