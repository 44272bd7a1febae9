#include <doctest.h>

#include <string>

#include "sigmav/config.hpp"
#include "sigmav/error.hpp"

using namespace sigmav;

namespace {

const std::string kMinimal = R"(
[run]
experiment = entropy-derivs
seed = 42

[model]
kind = rotators
sites = 8

[sampler]
n_steps = 20000
burn_in = 2000

[entropy]
vbar = 0.3, 0.5
max_order = 2
)";

int error_line(const std::string& text, bool require_seed = true) {
  try {
    parse_config(text, require_seed);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_text(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal config parses with defaults") {
  const auto c = parse_config(kMinimal);
  CHECK(c.experiment == "entropy-derivs");
  CHECK(*c.seed == 42u);
  REQUIRE(c.model);
  CHECK(c.model->sites == 8);
  CHECK(c.model->boundary == "fixed");
  REQUIRE(c.sampler);
  CHECK(c.sampler->n_chains == 8);
  CHECK(c.sampler->epsilon == 0.0);
  REQUIRE(c.entropy);
  CHECK(c.entropy->vbar == std::vector<double>{0.3, 0.5});
  CHECK_FALSE(c.grid.has_value());
}

TEST_CASE("negative shell width is rejected with its line") {
  std::string text = kMinimal;
  text.replace(text.find("n_steps"), 0, "epsilon = -1\n");
  CHECK(error_line(text) == 11);
  CHECK(error_text(text).find("sampler.epsilon = -1") != std::string::npos);
}

TEST_CASE("emitted text parses back to the same config") {
  const auto c = parse_config(kMinimal);
  CHECK(parse_config(emit_config(c)) == c);

  RunConfig k;
  k.experiment = "khinchin";
  k.seed = 7;
  k.khinchin.emplace();
  k.khinchin->bases = {"uniform", "exponential"};
  k.khinchin->x_hi = 0.1 + 0.2;  // shortest round-trip form must survive
  CHECK(parse_config(emit_config(k)) == k);

  RunConfig unseeded = c;
  unseeded.seed.reset();
  CHECK(parse_config(emit_config(unseeded), false) == unseeded);
}

TEST_CASE("unknown names report their line") {
  CHECK(error_line("[run]\nexperiment = khinchin\nseed = 1\ncolour = red\n") == 4);
  CHECK(error_line("[run]\nexperiment = khinchin\nseed = 1\n[khinchin]\n[extras]\n") == 5);
  CHECK(error_line("seed = 1\n") == 1);
  CHECK(error_line("[run\n") == 1);
  CHECK(error_line("[run]\nseed = 1\nseed = 2\n") == 3);
  CHECK(error_line("[run]\nexperiment = khinchin\nseed = 1\n[khinchin]\n[khinchin]\n") == 5);
}

TEST_CASE("type mismatches report their line") {
  std::string text = kMinimal;
  text.replace(text.find("sites = 8"), 9, "sites = eight");
  CHECK(error_line(text) == 8);
  CHECK(error_line("[run]\nexperiment = khinchin\nseed = -3\n[khinchin]\n") == 3);
  CHECK(error_line("[run]\nexperiment = khinchin\nseed = 1\n[khinchin]\nratio_check = maybe\n") == 5);
  CHECK(error_line("[run]\nexperiment = khinchin\nseed = 1\n[khinchin]\nladder = 16, x\n") == 5);
}

TEST_CASE("seed is required unless supplied later") {
  const std::string text = "[run]\nexperiment = khinchin\n[khinchin]\n";
  CHECK(error_text(text).find("run.seed") != std::string::npos);
  CHECK_NOTHROW(parse_config(text, false));
}

TEST_CASE("experiment blocks and constraints") {
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = khinchin\nseed = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = bake\nseed = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = critical-scan\nseed = 1\n[model]\n"), ConfigError);
  CHECK_NOTHROW(parse_config("[run]\nexperiment = critical-scan\nseed = 1\n[model]\n[window]\n"));
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = critical-scan\nseed = 1\n[model]\n[window]\n"
                               "vbar_lo = 2\nvbar_hi = 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = legendre\nseed = 1\n[legendre]\nsource = oracle\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\nexperiment = khinchin\nseed = 1\nthreads = -2\n[khinchin]\n"), ConfigError);
  std::string text = kMinimal;
  text.replace(text.find("max_order = 2"), 13, "max_order = 5");
  CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("comments and whitespace") {
  const auto c = parse_config("# leading\n[run] ; trailing\n  experiment =  khinchin  \nseed=3 # note\n\n[khinchin]\n");
  CHECK(c.experiment == "khinchin");
  CHECK(*c.seed == 3u);
}

}
