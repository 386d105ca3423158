#pragma once

// Run configuration: documented keys, defaults, validation and canonical
// serialization.

#include <cstdint>
#include <string>

#include "slipfsi/grid.hpp"

namespace slipfsi {

enum class BodyMode { free, pinned, prescribed };
enum class InitialKind { rest, rigid_rotation, swirl };
enum class SlipKind { navier, no_slip };

struct SimConfig {
  // geometry
  double r_outer = 2.0;
  double r_inner = 0.5;
  Vec2 q0 = Vec2::Zero();
  // physics
  double mu = 0.05;
  double beta = 1.0;
  SlipKind slip = SlipKind::navier;
  // grid
  int n_r = 32;
  int n_theta = 64;
  // time
  double dt = 0.0;  // 0 selects dt from the stability limit scaled by cfl
  double t_end = 1.0;
  double cfl = 0.5;
  // run
  std::uint64_t seed = 1;
  double delta0 = 0.0;  // 0 selects 0.1 (r_outer - r_inner)
  // solver
  double proj_tol = 1e-10;
  double newton_tol = 1e-12;
  int max_iter = 500;
  // body
  BodyMode body_mode = BodyMode::free;
  Vec2 a0 = Vec2::Zero();
  double omega0 = 0.0;
  // initial velocity
  InitialKind initial = InitialKind::rest;
  double amplitude = 0.0;
  double perturbation = 0.0;
  // transform
  bool track_rotation = true;
  // output
  int dump_every = 0;

  double effective_delta0() const { return delta0 > 0.0 ? delta0 : 0.1 * (r_outer - r_inner); }
  AnnulusGrid make_grid() const { return AnnulusGrid(n_r, n_theta, r_inner, r_outer); }
};

/// Throws ConfigError naming the violated invariant.
void validate(const SimConfig& c);

SimConfig parse_config(const std::string& path);
SimConfig parse_config_text(const std::string& text);
/// Canonical YAML text: every key, fixed order, round-trip exact doubles.
std::string serialize_config(const SimConfig& c);

const char* to_string(BodyMode m);
const char* to_string(InitialKind k);
const char* to_string(SlipKind k);

}  // namespace slipfsi
