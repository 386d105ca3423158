#include <doctest.h>

#include "slipfsi/config.hpp"
#include "slipfsi/errors.hpp"

using namespace slipfsi;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const SimConfig c = parse_config_text("geometry:\n  r_outer: 3.0\n");
  const SimConfig d;
  CHECK(c.r_outer == 3.0);
  CHECK(c.r_inner == d.r_inner);
  CHECK(c.mu == d.mu);
  CHECK(c.beta == d.beta);
  CHECK(c.n_r == d.n_r);
  CHECK(c.n_theta == d.n_theta);
  CHECK(c.t_end == d.t_end);
  CHECK(c.seed == d.seed);
  CHECK(c.proj_tol == d.proj_tol);
  CHECK(c.effective_delta0() == doctest::Approx(0.25));
}

TEST_CASE("all documented keys parse") {
  const SimConfig c = parse_config_text(R"(
geometry: {r_outer: 2.5, r_inner: 0.4, q0: [0.1, -0.2]}
physics: {mu: 0.1, beta: 3, slip: no_slip}
grid: {n_r: 12, n_theta: 40}
time: {dt: 0.001, t_end: 0.3, cfl: 0.4}
run: {seed: 99, delta0: 0.2}
solver: {proj_tol: 1e-9, newton_tol: 1e-11, max_iter: 50}
body: {mode: pinned, a0: [0, 0], omega0: 0.5}
initial: {kind: swirl, amplitude: 2, perturbation: 0.1}
transform: {track_rotation: false}
output: {dump_every: 5}
)");
  CHECK(c.q0.y() == -0.2);
  CHECK(c.slip == SlipKind::no_slip);
  CHECK(c.n_theta == 40);
  CHECK(c.cfl == 0.4);
  CHECK(c.seed == 99);
  CHECK(c.max_iter == 50);
  CHECK(c.body_mode == BodyMode::pinned);
  CHECK(c.initial == InitialKind::swirl);
  CHECK_FALSE(c.track_rotation);
  CHECK(c.dump_every == 5);
}

TEST_CASE("validation errors name the violated invariant") {
  CHECK(error_of("physics:\n  beta: -1\n").find("β > 0") != std::string::npos);
  CHECK(error_of("physics:\n  mu: 0\n").find("μ > 0") != std::string::npos);
  CHECK_FALSE(error_of("geometry:\n  r_inner: 3\n").empty());
  CHECK_FALSE(error_of("geometry:\n  q0: [1.4, 0]\n").empty());  // clearance below delta0
  CHECK_FALSE(error_of("grid:\n  n_r: 1\n").empty());
}

TEST_CASE("unknown keys and syntax errors report a line") {
  const std::string unknown = error_of("grid:\n  n_r: 8\n  n_phi: 3\n");
  CHECK(unknown.find("unknown key") != std::string::npos);
  CHECK(unknown.find("line 3") != std::string::npos);
  CHECK(error_of("nonsense:\n  a: 1\n").find("unknown") != std::string::npos);
  CHECK(error_of("grid:\n  n_r: [1,\n").find("line") != std::string::npos);
  CHECK_FALSE(error_of("grid:\n  n_r: abc\n").empty());
  CHECK_THROWS_AS(parse_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("serialization is canonical and idempotent") {
  const SimConfig c = parse_config_text("time:\n  t_end: 0.3\ngeometry:\n  q0: [0.1, 0.2]\nphysics:\n  mu: 0.1\n");
  const std::string once = serialize_config(c);
  const std::string twice = serialize_config(parse_config_text(once));
  CHECK(once == twice);
  CHECK(once.find("geometry:") < once.find("physics:"));
  CHECK(once.find("physics:") < once.find("time:"));
  const SimConfig back = parse_config_text(once);
  CHECK(back.q0 == c.q0);
  CHECK(back.t_end == c.t_end);
  CHECK(back.mu == c.mu);
}
