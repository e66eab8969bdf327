#include <stdexcept>
#include <string>

#include "doctest.h"
#include "ota/config.hpp"

using namespace ota;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.conf");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("shipped default config") {
  const auto c = load_config(std::string(OTASIM_SOURCE_DIR) + "/configs/default.conf");
  CHECK(c.channel.alpha == 1.5);
  CHECK(c.problem.num_agents == 100);
  CHECK(c.channel.fading_mean == 1.0);
  CHECK(c.training.schedule == Schedule::Kind::theta_over_k);
  CHECK_FALSE(c.analysis.C.has_value());
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("every shipped config validates") {
  for (const char* name : {"default.conf", "smoke.conf"})
    CHECK_NOTHROW(load_config(std::string(OTASIM_SOURCE_DIR) + "/configs/" + name));
}

TEST_CASE("tail index outside (1, 2] is rejected") {
  const auto msg = error_of("[channel]\nalpha = 0.8\n");
  CHECK(contains(msg, "channel.alpha"));
  CHECK(contains(msg, "(1, 2]"));
  CHECK(contains(error_of("[channel]\nalpha = 2.5\n"), "(1, 2]"));
}

TEST_CASE("unknown keys and sections are named") {
  const auto msg = error_of("[problem]\nnum_agent = 10\n");
  CHECK(contains(msg, "num_agent"));
  CHECK(contains(msg, "test.conf:2"));
  CHECK(contains(error_of("[plotting]\ncolor = red\n"), "plotting"));
  CHECK(contains(error_of("rounds = 3\n"), "test.conf:1"));
}

TEST_CASE("malformed and duplicate values") {
  CHECK(contains(error_of("[training]\nrounds = ten\n"), "training.rounds"));
  CHECK(contains(error_of("[training]\nrounds = -3\n"), "training.rounds"));
  CHECK(contains(error_of("[training]\nrounds = 5\nrounds = 6\n"), "duplicate"));
  CHECK(contains(error_of("[channel]\ninterference = maybe\n"), "channel.interference"));
  CHECK(contains(error_of("[problem]\nnum_agents\n"), "test.conf:2"));
  CHECK(contains(error_of("[training]\nschedule = power\nrho = 1.0\n"), "training.rho"));
}

TEST_CASE("cross-field invariants") {
  CHECK_FALSE(error_of("[channel]\nmode = waveform\nwaveform_samples = 3\n[problem]\ndim = 5\n").empty());
  CHECK_FALSE(error_of("[training]\nmomentum = on\nbeta = 1.0\n").empty());
  CHECK_FALSE(error_of("[problem]\ntype = svm\n").empty());
}

TEST_CASE("comments and whitespace") {
  const auto c = parse_config("# header\n\n[problem]   # trailing\n  dim = 4  # four\n", "x");
  CHECK(c.problem.dim == 4);
}

TEST_CASE("render and parse round trip") {
  auto c = load_config(std::string(OTASIM_SOURCE_DIR) + "/configs/default.conf");
  set_config_value(c, "channel.alpha", "1.3");
  set_config_value(c, "training.momentum", "on");
  set_config_value(c, "training.beta", "0.25");
  set_config_value(c, "analysis.C", "2.5");
  set_config_value(c, "channel.delta", "0.1");
  const auto text = render_config(c);
  const auto back = parse_config(text, "rendered");
  CHECK(render_config(back) == text);
  CHECK(back.channel.alpha == 1.3);
  CHECK(back.channel.delta == 0.1);
  CHECK(back.training.momentum);
  CHECK(back.analysis.C.value() == 2.5);
  CHECK_THROWS_AS(set_config_value(c, "channel.alpha", "3"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "channel.colour", "3"), ConfigError);
}

TEST_CASE("train_config follows the settings") {
  auto c = parse_config("[training]\nschedule = power\nrho = 0.5\nmomentum = on\nbeta = 0\ninit = origin\n", "x");
  const auto p = make_problem(c.problem);
  const auto t = c.train_config(*p);
  CHECK(t.schedule.kind == Schedule::Kind::power);
  CHECK(t.momentum_beta.has_value());
  CHECK(*t.momentum_beta == 0.0);
  CHECK(t.initial_point == Vec(c.problem.dim, 0.0));
  CHECK(t.metric_alpha.value() == 1.5);
}
