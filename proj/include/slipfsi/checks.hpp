#pragma once

// Property studies behind the check-* subcommands and the acceptance suite.
// Each study returns named measurements with their limits.

#include <ostream>
#include <string>
#include <vector>

#include "slipfsi/config.hpp"
#include "slipfsi/verification.hpp"

namespace slipfsi {

struct CheckItem {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool upper = true;  // pass iff value <= limit (otherwise value >= limit)
  bool pass = false;
};

struct CheckReport {
  std::string title;
  std::vector<CheckItem> items;
  double seconds = 0.0;

  void at_most(const std::string& name, double value, double limit);
  void at_least(const std::string& name, double value, double limit);
  bool passed() const;
};

/// Human-readable table, one line per item.
void print_report(std::ostream& os, const CheckReport& r);
/// Compact JSON object {"title", "passed", "failures": [...]} for scripts.
std::string failure_summary_json(const std::vector<CheckReport>& reports);

/// Rigid and flat atlas identities on the given grid.
CheckReport transform_identities(const AnnulusGrid& grid);

/// Transformed operators against exact physical operators pulled back by a
/// rigid map, for grids n x 2n with n in `sizes`.
CheckReport pullback_study(const std::vector<int>& sizes);

/// SO(N) drift over 1e4 steps and trajectory convergence of step_rigid.
CheckReport kinematics_study();

/// omega_tilde = Omega2 - omega1 in 2D and against a finite-difference
/// Q^T Q' oracle in 3D.
CheckReport relative_velocity_study();

struct EnergyScenario {
  std::string name;
  SimConfig config;
};

/// Pinned swirl decay and free-body perturbation at t_end = 0.5.
std::vector<EnergyScenario> energy_scenarios(const SimConfig& base);

/// Energy defect on n x 2n grids for each scenario; the finest level is
/// checked against 1e-3 E0 and the refinement slope against 1.
CheckReport energy_refinement(const std::vector<EnergyScenario>& scenarios,
                              const std::vector<int>& sizes);

/// Reynolds transport for a rotating off-center disk under joint refinement.
CheckReport reynolds_study(const std::vector<int>& levels);

/// Slip condition: per-step normal residual, Couette-with-slip oracle and the
/// large-beta limit.
CheckReport slip_study(const std::vector<int>& sizes);

struct WeakStrongStudy {
  std::vector<GapReport> reports;  // first entry is delta = 0
  CheckReport gap;                 // sweep slope, inequality, C stability, delta = 0
  CheckReport residual;            // residual ratio stability and delta = 0
};

WeakStrongStudy weak_strong_study(const SimConfig& config, const std::vector<double>& deltas,
                                  const WeakStrongOptions& opt = {});

/// Repeated runs give identical CSV bytes; a restored split run reproduces
/// the continuous trajectory. Uses `work_dir` for scratch output.
CheckReport reproducibility_study(const SimConfig& config, const std::string& work_dir);

}  // namespace slipfsi
