// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...] (default: all)

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>

#include "slipfsi/checks.hpp"
#include "slipfsi/errors.hpp"

using namespace slipfsi;

namespace {

SimConfig weak_strong_config() {
  SimConfig c;
  c.n_r = 24;
  c.n_theta = 48;
  c.t_end = 0.5;
  c.body_mode = BodyMode::free;
  c.q0 = Vec2(0.2, 0.1);
  c.initial = InitialKind::swirl;
  c.amplitude = 1.0;
  return c;
}

WeakStrongStudy& weak_strong() {
  static WeakStrongStudy st = [] {
    WeakStrongOptions o;
    o.sample_every = 8;
    return weak_strong_study(weak_strong_config(), {1e-2, 5e-3, 2.5e-3}, o);
  }();
  return st;
}

SimConfig reproducibility_config() {
  SimConfig c;
  c.n_r = 16;
  c.n_theta = 32;
  c.dt = 1.0 / 128;
  c.t_end = 0.25;
  c.q0 = Vec2(0.2, 0.1);
  c.initial = InitialKind::swirl;
  c.amplitude = 1.0;
  c.perturbation = 0.3;
  c.seed = 7;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  const std::string work = (std::filesystem::temp_directory_path() / "slipfsi_acceptance").string();

  const std::vector<std::pair<std::string, std::function<std::vector<CheckReport>()>>> criteria = {
      {"transform identities", [] { return std::vector{transform_identities(AnnulusGrid(32, 64, 0.5, 2.0))}; }},
      {"pullback oracle", [] { return std::vector{pullback_study({32, 64, 128})}; }},
      {"SO(N) and kinematics", [] { return std::vector{kinematics_study()}; }},
      {"relative angular velocity", [] { return std::vector{relative_velocity_study()}; }},
      {"energy inequality",
       [] { return std::vector{energy_refinement(energy_scenarios(SimConfig{}), {16, 32, 64})}; }},
      {"Reynolds transport", [] { return std::vector{reynolds_study({8, 16, 32})}; }},
      {"slip condition", [] { return std::vector{slip_study({16, 32})}; }},
      {"weak-strong mechanism", [] { return std::vector{weak_strong().gap}; }},
      {"residual ratio", [] { return std::vector{weak_strong().residual}; }},
      {"reproducibility", [&work] { return std::vector{reproducibility_study(reproducibility_config(), work)}; }},
  };

  int failed = 0;
  std::vector<std::string> lines;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    bool ok = true;
    double seconds = 0.0;
    try {
      for (const CheckReport& r : criteria[k].second()) {
        print_report(std::cout, r);
        ok = ok && r.passed();
        seconds += r.seconds;
      }
    } catch (const std::exception& e) {
      std::cout << "  error: " << e.what() << '\n';
      ok = false;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "criterion %2d %s  %s (%.1f s)", id, ok ? "PASS" : "FAIL",
                  criteria[k].first.c_str(), seconds);
    std::cout << buf << std::endl;
    lines.push_back(buf);
    failed += ok ? 0 : 1;
  }
  std::cout << "\nsummary\n";
  for (const auto& l : lines) std::cout << l << '\n';
  return failed == 0 ? 0 : 1;
}
