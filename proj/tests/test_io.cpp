#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "slipfsi/errors.hpp"
#include "slipfsi/io.hpp"

using namespace slipfsi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "slipfsi_unit" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

SimConfig small() {
  SimConfig c;
  c.n_r = 8;
  c.n_theta = 16;
  c.q0 = Vec2(0.2, 0.1);
  c.initial = InitialKind::swirl;
  c.amplitude = 1.0;
  c.perturbation = 0.2;
  c.dt = 0.01;
  c.t_end = 0.05;
  return c;
}

}  // namespace

TEST_CASE("numbers round-trip through the CSV format") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("simulate with t_end = 0 writes the initial snapshot only") {
  SimConfig c = small();
  c.t_end = 0.0;
  const fs::path dir = scratch("t0");
  const auto files = simulate(c, dir.string());
  CHECK(files.size() == 3);
  const auto traj = lines(dir / "trajectory.csv");
  REQUIRE(traj.size() == 2);
  CHECK(traj[0] == "t,q_x,q_y,theta,a_x,a_y,omega");
  CHECK(lines(dir / "energy.csv")[0] == "t,E,D_visc,D_slip,defect");
  const auto dump = lines(dir / "fields_000000.csv");
  CHECK(dump[0] == "# slipfsi field dump");
  CHECK(dump[3].find("n_r 8 n_theta 16") != std::string::npos);
  CHECK(dump.size() == 5 + 1 + 9 * 16);
}

TEST_CASE("identical config and seed give identical CSV bytes") {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  simulate(small(), a.string());
  simulate(small(), b.string());
  SimConfig other = small();
  other.seed = 2;
  simulate(other, c.string());
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "energy.csv") == slurp(b / "energy.csv"));
  CHECK(slurp(a / "trajectory.csv") != slurp(c / "trajectory.csv"));
}

TEST_CASE("checkpoint round trip restores the full state") {
  const SimConfig c = small();
  const FluidSolver solver(c);
  SimState s = solver.initialize();
  s = solver.step(s, 0.01);
  Checkpoint cp{s, EnergyLedger{}, 0.01, 1};
  cp.ledger.E0 = 1.5;
  const fs::path dir = scratch("ckpt");
  const std::string path = (dir / "a.ckpt").string();
  save_checkpoint(path, cp);
  const Checkpoint back = load_checkpoint(path, c);
  CHECK(back.state.flow.U.raw() == s.flow.U.raw());
  CHECK(back.state.flow.P.raw() == s.flow.P.raw());
  CHECK(back.state.flow.t == s.flow.t);
  CHECK(back.state.rigid.q == s.rigid.q);
  CHECK(back.state.rigid.Q == s.rigid.Q);
  CHECK(back.state.rigid.omega == s.rigid.omega);
  CHECK(back.state.atlas->X.raw() == s.atlas->X.raw());
  CHECK(back.state.atlas->Ydot.raw() == s.atlas->Ydot.raw());
  CHECK(back.state.atlas->body_q == s.atlas->body_q);
  CHECK(back.ledger.E0 == 1.5);
  CHECK(back.step == 1);
  // Stepping the restored state matches stepping the original.
  const SimState n1 = solver.step(s, 0.01), n2 = solver.step(back.state, 0.01);
  CHECK(n1.flow.U.raw() == n2.flow.U.raw());
  CHECK(n1.rigid.q == n2.rigid.q);
}

TEST_CASE("damaged checkpoints are rejected") {
  const SimConfig c = small();
  const FluidSolver solver(c);
  Checkpoint cp{solver.initialize(), EnergyLedger{}, 0.01, 0};
  const fs::path dir = scratch("bad");
  const std::string path = (dir / "good.ckpt").string();
  save_checkpoint(path, cp);
  const std::string bytes = slurp(path);
  auto write = [&](const std::string& name, const std::string& data) {
    const std::string p = (dir / name).string();
    std::ofstream(p, std::ios::binary) << data;
    return p;
  };
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(load_checkpoint(write("magic", magic), c), CheckpointError);
  std::string version = bytes;
  version[8] = 7;
  CHECK_THROWS_WITH_AS(load_checkpoint(write("version", version), c), doctest::Contains("version"),
                       CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(write("trunc", bytes.substr(0, bytes.size() / 2)), c), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(write("tiny", bytes.substr(0, 5)), c), CheckpointError);
  std::string flipped = bytes;
  flipped[bytes.size() - 9] ^= 0x10;
  CHECK_THROWS_WITH_AS(load_checkpoint(write("flip", flipped), c), doctest::Contains("checksum"),
                       CheckpointError);
  SimConfig bigger = c;
  bigger.n_r = 10;
  CHECK_THROWS_AS(load_checkpoint(path, bigger), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string(), c), CheckpointError);
}

TEST_CASE("gap CSV has one block per delta") {
  std::vector<GapReport> reports(3);
  for (int k = 0; k < 3; ++k) {
    reports[k].delta = 1e-2 / (1 << k);
    reports[k].times = {0.0, 0.1};
    reports[k].gap_L2 = {reports[k].delta, 0.5 * reports[k].delta};
    reports[k].gap_a = reports[k].gap_omega = reports[k].integrand = {0.0, 0.0};
  }
  const fs::path dir = scratch("gap");
  write_gap_csv((dir / "gap.csv").string(), reports);
  const auto l = lines(dir / "gap.csv");
  CHECK(l[0] == "t,gap_L2,gap_a,gap_omega,integrand");
  int blocks = 0;
  for (const auto& s : l) blocks += s.rfind("# delta=", 0) == 0;
  CHECK(blocks == 3);
  CHECK(l.size() == 1 + 3 * 3);
}

TEST_CASE("manifest records config, version, seed and outputs") {
  RunManifest m;
  m.command = "simulate";
  m.config_yaml = serialize_config(small());
  m.seed = 11;
  m.outputs = {"trajectory.csv"};
  m.start_time = m.end_time = utc_now();
  const auto j = nlohmann::json::parse(manifest_json(m));
  CHECK(j["version"] == kVersion);
  CHECK(j["seed"] == 11);
  CHECK(j["outputs"][0] == "trajectory.csv");
  CHECK(parse_config_text(j["config"].get<std::string>()).n_theta == 16);
  CHECK(j["start_time"].get<std::string>().size() == 20);
}
