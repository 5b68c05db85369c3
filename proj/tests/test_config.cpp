#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>

#include "core/config.hpp"
#include "core/toml_lite.hpp"

using namespace fibermc;

TEST_CASE("toml subset") {
  std::string err;

  SUBCASE("values and sections") {
    TomlTable t;
    std::string text =
        "schema = 1\n"
        "# comment\n"
        "[model]\n"
        "id = \"so2-planar\"  # trailing comment\n"
        "potential_c = 0.5\n"
        "irreps = [\"0\", \"1\"]\n"
        "metric_v = [[2.0, 0.0],\n"
        "            [0.0, 1.0]]\n"
        "[run]\n"
        "n_paths = 100\n"
        "flag = true\n";
    REQUIRE_MESSAGE(toml_parse(text, t, err), err);
    CHECK(t.at("schema").num == 1.0);
    CHECK(t.at("model.id").str == "so2-planar");
    CHECK(t.at("model.potential_c").num == 0.5);
    CHECK(t.at("model.irreps").array.size() == 2);
    CHECK(t.at("model.metric_v").array[0].array[0].num == 2.0);
    CHECK(t.at("run.n_paths").num == 100.0);
    CHECK(t.at("run.flag").boolean);
  }

  SUBCASE("errors carry line positions") {
    TomlTable t;
    CHECK_FALSE(toml_parse("a = \"unterminated\n", t, err));
    CHECK(err.find("line") != std::string::npos);
    t.clear();
    CHECK_FALSE(toml_parse("a = 1\na = 2\n", t, err));
    CHECK(err.find("duplicate") != std::string::npos);
    t.clear();
    CHECK_FALSE(toml_parse("a = [1, 2\n\n", t, err));
    t.clear();
    CHECK_FALSE(toml_parse("a 1\n", t, err));
    t.clear();
    CHECK_FALSE(toml_parse("a = 1 extra\n", t, err));
    t.clear();
    CHECK_FALSE(toml_parse("a = 12x\n", t, err));
  }
}

TEST_CASE("config defaults") {
  RunConfig cfg;
  std::string err;
  REQUIRE_MESSAGE(config_from_string("", cfg, err), err);
  CHECK(cfg.model_id == "so2-planar");
  CHECK(cfg.potential_c == 0.0);
  CHECK(cfg.params.t_b == 0.25);
  CHECK(cfg.params.dt == 1e-3);
  CHECK(cfg.params.n_paths == 10000);
  CHECK(cfg.params.workers == 1);
  CHECK(cfg.phi_width == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(cfg.sim_process == "intrinsic");

  Materialized mz;
  REQUIRE_MESSAGE(config_materialize(cfg, mz, err), err);
  CHECK(mz.model.id == "so2-planar");
  CHECK(mz.start_x.size() == 1);
  CHECK(mz.start_x[0] == 1.0);
  CHECK(mz.start_f.size() == 2);
  CHECK(mz.start_f[0] == 1.0);
  CHECK(mz.start_f[1] == 0.0);
  CHECK(mz.phi.cx_t == mz.start_x);
  CHECK(mz.phi.cf_t == mz.start_f);
  CHECK(mz.irreps.size() == 2);  // model default label set
}

TEST_CASE("config full parse") {
  std::string text =
      "schema = 1\n"
      "[model]\n"
      "id = \"su2\"\n"
      "potential_c = 0.1\n"
      "irreps = [\"0\", \"1/2\"]\n"
      "x_min = 0.01\n"
      "radius_max = 50.0\n"
      "[run]\n"
      "mu = 1.5\n"
      "kappa = 0.8\n"
      "mass = 2.0\n"
      "t_a = 0.0\n"
      "t_b = 0.5\n"
      "dt = 0.002\n"
      "n_paths = 500\n"
      "seed = 42\n"
      "workers = 2\n"
      "[start]\n"
      "x = [1.2]\n"
      "f = [0.5, 0.0, 0.0, 0.1]\n"
      "[test_function]\n"
      "center_x = [1.0]\n"
      "center_f = [0.4, 0.0, 0.0, 0.0]\n"
      "width = 0.9\n"
      "[generator]\n"
      "dt = 0.0005\n"
      "nodes = 12\n"
      "[simulate]\n"
      "process = \"total\"\n"
      "paths = 7\n"
      "[output]\n"
      "dir = \"/tmp/fibermc-test-out\"\n";
  RunConfig cfg;
  std::string err;
  REQUIRE_MESSAGE(config_from_string(text, cfg, err), err);
  CHECK(cfg.model_id == "su2");
  CHECK(cfg.irrep_labels.size() == 2);
  CHECK(cfg.irrep_labels[1] == "1/2");
  CHECK(cfg.x_min == 0.01);
  CHECK(cfg.params.seed == 42);
  CHECK(cfg.params.workers == 2);
  CHECK(cfg.generator_nodes == 12);
  CHECK(cfg.sim_process == "total");
  CHECK(cfg.sim_paths == 7);
  CHECK(cfg.out_dir == "/tmp/fibermc-test-out");

  Materialized mz;
  REQUIRE_MESSAGE(config_materialize(cfg, mz, err), err);
  CHECK(mz.model.id == "su2");
  CHECK(mz.model.guard.x_min == 0.01);
  CHECK(mz.model.guard.radius_max == 50.0);
  CHECK(mz.start_x[0] == 1.2);
  CHECK(mz.start_f.size() == 4);
  CHECK(mz.irreps.size() == 2);
  CHECK(mz.irreps[1]->dim == 2);
  CHECK(mz.phi.cx_t[0] == 1.0);
  CHECK(mz.phi.width == 0.9);
}

TEST_CASE("config rejections") {
  RunConfig cfg;
  std::string err;

  CHECK_FALSE(config_from_string("schema = 2\n", cfg, err));
  CHECK(err.find("schema") != std::string::npos);

  cfg = RunConfig();
  CHECK_FALSE(config_from_string("[run]\ndt = -0.5\n", cfg, err));
  CHECK(err.find("dt") != std::string::npos);

  cfg = RunConfig();
  CHECK_FALSE(config_from_string("[run]\nt_b = -1.0\n", cfg, err));

  cfg = RunConfig();
  CHECK_FALSE(config_from_string("[run]\nn_paths = 2.5\n", cfg, err));
  CHECK(err.find("integer") != std::string::npos);

  cfg = RunConfig();
  CHECK_FALSE(config_from_string("[model]\nid = 3\n", cfg, err));
  CHECK(err.find("string") != std::string::npos);

  cfg = RunConfig();
  CHECK_FALSE(config_from_string("[nowhere]\nkey = 1\n", cfg, err));
  CHECK(err.find("unknown key") != std::string::npos);

  cfg = RunConfig();
  CHECK_FALSE(config_from_string("[simulate]\nprocess = \"sideways\"\n", cfg, err));

  cfg = RunConfig();
  CHECK_FALSE(config_from_string("[generator]\nnodes = 1\n", cfg, err));
}

TEST_CASE("materialize rejections") {
  RunConfig cfg;
  Materialized mz;
  std::string err;

  cfg.model_id = "so3";
  CHECK_FALSE(config_materialize(cfg, mz, err));
  CHECK(err.find("model") != std::string::npos);

  cfg = RunConfig();
  cfg.irrep_labels = {"7/3"};
  CHECK_FALSE(config_materialize(cfg, mz, err));

  cfg = RunConfig();
  cfg.start_f = {1.0, 2.0, 3.0};  // planar model wants two components
  CHECK_FALSE(config_materialize(cfg, mz, err));
  CHECK(err.find("start.f") != std::string::npos);

  cfg = RunConfig();
  cfg.has_metric_v = true;
  cfg.metric_v = Mat::Zero(2, 2);
  cfg.metric_v << 1.0, 0.5, 0.4, 1.0;  // asymmetric
  CHECK_FALSE(config_materialize(cfg, mz, err));

  cfg = RunConfig();
  cfg.has_metric_v = true;
  cfg.metric_v = Mat::Ones(1, 2);  // not even square
  CHECK_FALSE(config_materialize(cfg, mz, err));
}

TEST_CASE("single key overrides") {
  RunConfig cfg;
  std::string err;
  REQUIRE(config_from_string("", cfg, err));

  REQUIRE_MESSAGE(config_set(cfg, "run.seed", "99", err), err);
  CHECK(cfg.params.seed == 99);
  REQUIRE(config_set(cfg, "model.id", "\"su2\"", err));
  CHECK(cfg.model_id == "su2");
  REQUIRE(config_set(cfg, "start.f", "[0.1, 0.0, 0.0, 0.0]", err));
  CHECK(cfg.start_f.size() == 4);
  REQUIRE(config_set(cfg, "model.metric_v",
                     "[[2.0,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]", err));
  CHECK(cfg.has_metric_v);

  CHECK_FALSE(config_set(cfg, "run.dt", "-1.0", err));
  CHECK_FALSE(config_set(cfg, "not.a.key", "1", err));
  CHECK_FALSE(config_set(cfg, "run.seed", "\"text\"", err));
}

TEST_CASE("environment fallback for the output directory") {
  setenv("FIBERMC_OUT_DIR", "/tmp/fibermc-env-dir", 1);
  RunConfig cfg;
  std::string err;
  REQUIRE(config_from_string("", cfg, err));
  CHECK(cfg.out_dir == "/tmp/fibermc-env-dir");

  RunConfig cfg2;
  REQUIRE(config_from_string("[output]\ndir = \"/tmp/explicit\"\n", cfg2, err));
  CHECK(cfg2.out_dir == "/tmp/explicit");  // explicit value wins
  unsetenv("FIBERMC_OUT_DIR");
}
