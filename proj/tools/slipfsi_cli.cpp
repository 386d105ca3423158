// slipfsi command-line driver.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "slipfsi/checks.hpp"
#include "slipfsi/errors.hpp"
#include "slipfsi/io.hpp"

namespace fs = std::filesystem;
using namespace slipfsi;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<double> deltas;
  std::optional<int> refine;
  std::string restore;
  std::string checkpoint;
};

SimConfig load(const Options& o) {
  SimConfig c = o.config.empty() ? SimConfig{} : parse_config(o.config);
  if (o.seed) c.seed = *o.seed;
  validate(c);
  return c;
}

// Grid sizes n / 2^k, ..., n.
std::vector<int> coarsened(int n, int k) {
  std::vector<int> s;
  for (int i = k; i >= 0; --i) s.push_back(std::max(4, n >> i));
  return s;
}

int finish(const std::string& command, const SimConfig& c, const Options& o,
           const std::vector<CheckReport>& reports, std::vector<std::string> outputs,
           const std::string& start) {
  bool ok = true;
  for (const CheckReport& r : reports) {
    print_report(std::cout, r);
    ok = ok && r.passed();
  }
  if (!o.out.empty()) {
    RunManifest m;
    m.command = command;
    m.config_yaml = serialize_config(c);
    m.start_time = start;
    m.end_time = utc_now();
    m.seed = c.seed;
    m.status = ok ? "ok" : "failed";
    if (!reports.empty()) {
      std::ofstream(fs::path(o.out) / "report.json") << failure_summary_json(reports) << '\n';
      outputs.push_back("report.json");
    }
    m.outputs = outputs;
    write_manifest(o.out, m);
  }
  if (!ok) std::cerr << "FAILED " << failure_summary_json(reports) << '\n';
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

int run(const std::string& command, const Options& o) {
  const std::string start = utc_now();
  const SimConfig c = load(o);
  if (!o.out.empty()) fs::create_directories(o.out);

  if (command == "simulate") {
    if (o.out.empty()) throw InvalidInput("simulate requires --out");
    const auto files = simulate(c, o.out, {o.restore, o.checkpoint});
    std::cout << "wrote " << files.size() << " files to " << o.out << '\n';
    return finish(command, c, o, {}, files, start);
  }
  if (command == "check-transform") {
    const int k = o.refine.value_or(2);
    std::vector<int> sizes;
    for (int i = 0; i <= k; ++i) sizes.push_back(c.n_r << i);
    return finish(command, c, o,
                  {transform_identities(c.make_grid()), pullback_study(sizes), kinematics_study(),
                   relative_velocity_study()},
                  {}, start);
  }
  if (command == "check-energy") {
    return finish(command, c, o,
                  {energy_refinement(energy_scenarios(c), coarsened(c.n_r, o.refine.value_or(2)))}, {},
                  start);
  }
  if (command == "reynolds") {
    const int k = o.refine.value_or(2);
    std::vector<int> levels;
    for (int i = 0; i <= k; ++i) levels.push_back(8 << i);
    return finish(command, c, o, {reynolds_study(levels)}, {}, start);
  }
  if (command == "weak-strong") {
    const std::vector<double> deltas = o.deltas.empty() ? std::vector<double>{1e-2, 5e-3, 2.5e-3} : o.deltas;
    const WeakStrongStudy st = weak_strong_study(c, deltas);
    std::vector<std::string> outputs;
    if (!o.out.empty()) {
      const std::vector<GapReport> swept(st.reports.begin() + 1, st.reports.end());
      write_gap_csv((fs::path(o.out) / "gap.csv").string(), swept);
      outputs.push_back("gap.csv");
    }
    std::vector<double> ds, sup;
    for (std::size_t k = 1; k < st.reports.size(); ++k) {
      const GapReport& g = st.reports[k];
      double m = 0.0;
      for (double v : g.gap_L2) m = std::max(m, v);
      ds.push_back(g.delta);
      sup.push_back(m);
      std::cout << "delta " << g.delta << ": sup gap " << m << ", fitted_C " << g.fitted_C
                << ", residual ratio " << g.residual_ratio << '\n';
    }
    if (ds.size() >= 2) std::cout << "log-log slope " << loglog_slope(ds, sup) << '\n';
    return finish(command, c, o, {st.gap, st.residual}, outputs, start);
  }
  throw InvalidInput("unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid disk in a slip-bounded viscous fluid"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "full coupled run: trajectory.csv, energy.csv, field dumps"},
      {"check-transform", "transform identities, pullback oracle and kinematics"},
      {"check-energy", "energy-defect refinement study"},
      {"reynolds", "Reynolds transport refinement study"},
      {"weak-strong", "perturbation sweep, writes gap.csv"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "YAML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "override run.seed");
    sub->add_option("--refine", o.refine, "number of refinement levels")->check(CLI::Range(0, 6));
    if (name == "weak-strong") sub->add_option("--delta", o.deltas, "perturbation size (repeatable)");
    if (name == "simulate") {
      sub->add_option("--restore", o.restore, "continue from a checkpoint")->check(CLI::ExistingFile);
      sub->add_option("--checkpoint", o.checkpoint, "write a checkpoint at the end");
    }
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const Error& e) {
    nlohmann::ordered_json j{{"command", command}, {"error", e.what()}};
    std::cerr << "ERROR " << j.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    nlohmann::ordered_json j{{"command", command}, {"error", e.what()}};
    std::cerr << "ERROR " << j.dump() << '\n';
    return 3;
  }
}
