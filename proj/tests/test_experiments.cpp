#include <doctest.h>

#include <cmath>
#include <sstream>

#include "s2/config.hpp"
#include "s2/experiments.hpp"

using namespace s2;

TEST_CASE("csv layout") {
  std::ostringstream out;
  exp::write_csv(out, {{"fig2", 7, "0", 0.05, "separate_aoi", "avg_weighted_error", 0.125},
                       {"fig2", 7, "all", 0.1, "separate_aoi", "avg_weighted_error_mean", 1.0 / 3.0}});
  CHECK(out.str() ==
        "preset,seed,replication,sweep,policy,metric,value\n"
        "fig2,7,0,0.05,separate_aoi,avg_weighted_error,0.125\n"
        "fig2,7,all,0.1,separate_aoi,avg_weighted_error_mean,0.333333333333\n");
}

TEST_CASE("summary statistics") {
  const auto s = exp::summarize({1.0, 2.0, 3.0, 6.0});
  CHECK(s.count == 4);
  CHECK(s.mean == doctest::Approx(3.0));
  // sample variance 14/3, standard error sqrt(14/3 / 4)
  CHECK(s.stderr_ == doctest::Approx(std::sqrt(14.0 / 12.0)));
  const exp::Stat a{0, 3.0, 5}, b{0, 4.0, 5};
  CHECK(exp::pooled_stderr(a, b) == doctest::Approx(5.0));
  CHECK(exp::summarize({2.0}).stderr_ == 0.0);
}

TEST_CASE("replication seeds are distinct and stable") {
  CHECK(exp::replication_seed(1, 0) == exp::replication_seed(1, 0));
  CHECK(exp::replication_seed(1, 0) != exp::replication_seed(1, 1));
  CHECK(exp::replication_seed(1, 0) != exp::replication_seed(2, 0));
}

TEST_CASE("a preset re-run is byte-identical") {
  exp::PresetOptions o;
  o.horizon = 2000;
  o.replications = 2;
  o.grid = {0.2};
  std::ostringstream a, b;
  exp::write_csv(a, exp::run_preset("fig2", o).rows);
  exp::write_csv(b, exp::run_preset("fig2", o).rows);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("preset,seed,replication,sweep,policy,metric,value\n", 0) == 0);
  CHECK_THROWS_AS(exp::run_preset("fig9", o), InvalidArgument);
  o.grid = {0.6};
  CHECK_THROWS_AS(exp::run_preset("fig2", o), InvalidArgument);
}

TEST_CASE("run config with a sweep") {
  const auto job = cfg::parse_config(R"({
    "horizon": 3000, "seed": 5, "replications": 2,
    "policies": ["centralized_whittle", "round_robin"],
    "nodes": [{"count": 3, "error": {"kind": "quadratic"}, "p_e": 0.1},
              {"source": {"type": "random_walk", "q_up": 0.3, "q_down": 0.3, "q_stay": 0.4}}],
    "sweep": {"variable": "p_e", "values": [0.0, 0.5]}
  })");
  REQUIRE(std::holds_alternative<exp::RunSpec>(job));
  const auto& spec = std::get<exp::RunSpec>(job);
  CHECK(spec.base.nodes.size() == 4);
  CHECK(spec.base.nodes[0].f.kind() == ErrorKind::quadratic);
  CHECK(spec.base.nodes[3].p_e == 0.0);
  const auto rows = exp::run_spec(spec);
  exp::Table t;
  for (const auto& r : rows)
    if (r.replication != "all") t.add(r.sweep, r.policy, r.metric, r.value);
  CHECK(t.sweeps() == std::vector<double>{0.0, 0.5});
  // a worse channel cannot help the index policy on common random numbers
  CHECK(t.stat(0.5, "centralized_whittle", "avg_weighted_error").mean >
        t.stat(0.0, "centralized_whittle", "avg_weighted_error").mean);
  CHECK(t.stat(0.0, "round_robin", "avg_weighted_error").count == 2);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(cfg::parse_config("{not json"), cfg::ConfigError);
  CHECK_THROWS_AS(cfg::parse_config(R"({"nodes": [{}], "horizn": 5})"), cfg::ConfigError);
  CHECK_THROWS_AS(cfg::parse_config(R"({"nodes": [{"error": {"kind": "linear", "slope": 2}}]})"), cfg::ConfigError);
  CHECK_THROWS_AS(cfg::parse_config(R"({"nodes": []})"), cfg::ConfigError);
  CHECK_THROWS_AS(cfg::parse_config(R"({"nodes": [{"p_e": 1.5}]})"), cfg::ConfigError);
  CHECK_THROWS_AS(cfg::parse_config(R"({"nodes": [{}], "horizon": "long"})"), cfg::ConfigError);
  CHECK_THROWS_AS(cfg::parse_config(R"({"preset": "fig2", "nodes": []})"), cfg::ConfigError);

  const auto job = cfg::parse_config(R"({"preset": "fig3a", "horizon": 1000, "replications": 1, "d_max": 8})");
  REQUIRE(std::holds_alternative<cfg::PresetJob>(job));
  CHECK(std::get<cfg::PresetJob>(job).options.d_max == 8);

  const auto etsu = cfg::parse_config(R"({"nodes": [{"count": 4}], "contention": "slotted",
      "policy": {"kind": "etsu", "nu": 0.5, "mapping": {"i_th": 4, "p_tx": 0.25}}})");
  const auto& c = std::get<exp::RunSpec>(etsu).base;
  CHECK(c.contention == sim::ContentionModel::slotted);
  REQUIRE(c.etsu_mapping.has_value());
  CHECK(c.etsu_mapping->p_tx == 0.25);
}
