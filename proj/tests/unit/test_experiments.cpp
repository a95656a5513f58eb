#include <doctest.h>

#include "subibp/experiments.hpp"

using namespace subibp;

namespace {

RunConfig base_config(const std::string& command) {
  RunConfig cfg;
  cfg.command = command;
  cfg.model = "zero";
  cfg.d = 1;
  cfg.sub = "stable:0.5";
  cfg.T = 1.0;
  cfg.n = 32;
  cfg.paths = 5000;
  cfg.seed = 99;
  cfg.seed_set = true;
  cfg.threads = 1;
  cfg.f = "sin";
  return cfg;
}

}  // namespace

TEST_CASE("verify-ibp run produces a passing report with the config echoed") {
  RunConfig cfg = base_config("verify-ibp");
  const Report rep = run_command(cfg);
  CHECK(rep.exit_code == 0);
  CHECK(rep.json["pass"] == true);
  CHECK(rep.json["config"]["sub"] == "stable:0.5");
  CHECK(rep.json["config"]["seed"] == 99);
  CHECK(!rep.json["config"].contains("threads"));
  CHECK(rep.csv_lines.size() >= 3);
  CHECK(rep.csv_lines[0] == "name,mean,stderr,n,z");
}

TEST_CASE("seed is mandatory") {
  RunConfig cfg = base_config("verify-ibp");
  cfg.seed_set = false;
  CHECK_THROWS_AS(run_command(cfg), ConfigurationError);
}

TEST_CASE("hypothesis violations surface as configuration errors") {
  RunConfig cfg = base_config("verify-ibp");
  cfg.sub = "cpoisson:3,0.5";
  CHECK_THROWS_AS(run_command(cfg), ConfigurationError);

  RunConfig bad_model = base_config("verify-ibp");
  bad_model.model = "unknown";
  CHECK_THROWS(run_command(bad_model));
}

TEST_CASE("reports are byte-identical across worker counts") {
  for (const std::string cmd : {"verify-ibp", "moments"}) {
    RunConfig cfg = base_config(cmd);
    cfg.paths = 4000;
    std::string dumps[3];
    int i = 0;
    for (int threads : {1, 4, 8}) {
      cfg.threads = threads;
      dumps[i++] = run_command(cfg).json.dump(2);
    }
    CHECK(dumps[0] == dumps[1]);
    CHECK(dumps[0] == dumps[2]);
  }
}

TEST_CASE("truncation command checks decay and exact vanishing") {
  RunConfig cfg = base_config("truncation");
  cfg.model = "sine";
  cfg.model_params["eps"] = 0.25;
  cfg.sub = "fixed:0.125:2.5,0.25:1.5,0.375:0.8,0.625:0.3,0.875:0.05";
  cfg.paths = 1500;
  cfg.n = 64;
  cfg.eps_list = "2,1,0.5,0.1,0.01";
  const Report rep = run_command(cfg);
  CHECK(rep.exit_code == 0);
  CHECK(rep.json["results"].size() == 5);
}

TEST_CASE("moments command validates the stable oracles") {
  RunConfig cfg = base_config("moments");
  cfg.sub = "stable:0.75";
  cfg.paths = 50000;
  const Report rep = run_command(cfg);
  CHECK(rep.exit_code == 0);
}

TEST_CASE("density command reports KDE mass near 1") {
  RunConfig cfg = base_config("density");
  cfg.sub = "driftonly:1";
  cfg.paths = 20000;
  cfg.n = 8;
  cfg.grid_points = 81;
  const Report rep = run_command(cfg);
  CHECK(rep.exit_code == 0);
  const double mass = rep.json["results"]["mass"];
  CHECK(mass > 0.98);
  CHECK(mass < 1.02);
}

TEST_CASE("scaling command emits slopes") {
  RunConfig cfg = base_config("scaling");
  cfg.rho = 0.75;
  cfg.paths = 2000;
  cfg.n = 32;
  cfg.t_grid = "0.05,0.1,0.2,0.4,1";
  const Report rep = run_command(cfg);
  CHECK(rep.exit_code == 0);
  const double analytic = rep.json["results"]["analytic_slope"];
  CHECK(analytic == doctest::Approx(-1.0 / 1.5).epsilon(1e-9));
}

TEST_CASE("vector parsing") {
  CHECK(parse_vector("1,2", 2)(1) == 2.0);
  CHECK(parse_vector("0.5", 3)(2) == 0.5);  // scalar broadcast
  CHECK_THROWS_AS(parse_vector("1,2,3", 2), ConfigurationError);
  const auto vs = parse_vector_list("1,0;0,1", 2);
  CHECK(vs.size() == 2);
  CHECK(vs[1](1) == 1.0);
}
