#include "slipfsi/io.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "slipfsi/errors.hpp"

namespace slipfsi {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path, std::ios::binary | std::ios::trunc), ncols_(columns.size()) {
  if (!out_) throw InvalidInput("cannot open '" + path + "' for writing");
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncols_) throw ShapeMismatch("csv row width");
  for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_number(values[k]);
  out_ << '\n';
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << '\n'; }

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> c = {"t", "q_x", "q_y", "theta", "a_x", "a_y", "omega"};
  return c;
}
const std::vector<std::string>& energy_columns() {
  static const std::vector<std::string> c = {"t", "E", "D_visc", "D_slip", "defect"};
  return c;
}
const std::vector<std::string>& gap_columns() {
  static const std::vector<std::string> c = {"t", "gap_L2", "gap_a", "gap_omega", "integrand"};
  return c;
}

std::vector<double> trajectory_row(const SimState& s) {
  const RigidState& r = s.rigid;
  return {s.flow.t, r.q(0), r.q(1), r.angle(), r.a(0), r.a(1), r.omega(0)};
}

std::vector<double> energy_row(const EnergyLedger& L) {
  return {L.t, L.E_total, L.D_visc, L.D_slip, L.defect};
}

void write_field_dump(const std::string& path, const SimState& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  const TransformAtlas& atlas = *s.atlas;
  const AnnulusGrid& g = atlas.grid();
  out << "# slipfsi field dump\n";
  out << "# version 1\n";
  out << "# t " << format_number(s.flow.t) << '\n';
  out << "# n_r " << g.n_r() << " n_theta " << g.n_theta() << " r_inner " << format_number(g.r_inner())
      << " r_outer " << format_number(g.r_outer()) << '\n';
  out << "# body q " << format_number(s.rigid.q(0)) << ' ' << format_number(s.rigid.q(1)) << " theta "
      << format_number(s.rigid.angle()) << '\n';
  out << "i,j,y_x,y_y,x_x,x_y,U_x,U_y,u_x,u_y,P\n";
  for (int i = 0; i <= g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const Vec2 y = g.node(i, j), x = atlas.X.vec(i, j), U = s.flow.U.vec(i, j);
      const Vec2 u = atlas.jacobian(i, j) * U;
      out << i << ',' << j;
      for (double v : {y.x(), y.y(), x.x(), x.y(), U.x(), U.y(), u.x(), u.y(), s.flow.P(0, i, j)})
        out << ',' << format_number(v);
      out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'S', 'L', 'I', 'P', 'F', 'S', 'I', '1'};

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t k = 0; k < n; ++k) {
    h ^= static_cast<unsigned char>(data[k]);
    h *= 1099511628211ull;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(const T& v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void doubles(const double* p, std::size_t n) {
    pod<std::uint64_t>(n);
    buf_.append(reinterpret_cast<const char*>(p), n * sizeof(double));
  }
  void vec(const VecX& v) { doubles(v.data(), static_cast<std::size_t>(v.size())); }
  void mat(const MatX& m) {
    pod<std::int32_t>(static_cast<std::int32_t>(m.rows()));
    pod<std::int32_t>(static_cast<std::int32_t>(m.cols()));
    doubles(m.data(), static_cast<std::size_t>(m.size()));
  }
  void field(const GridField& f) {
    pod<std::int32_t>(f.ncomp());
    pod<std::int32_t>(f.n_r());
    pod<std::int32_t>(f.n_theta());
    pod<double>(f.t());
    pod<std::uint8_t>(f.ghosts_filled() ? 1 : 0);
    doubles(f.raw().data(), f.raw().size());
  }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const char* p, std::size_t n) : p_(p), n_(n) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, p_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::vector<double> doubles() {
    const auto n = pod<std::uint64_t>();
    if (n > (n_ - pos_) / sizeof(double)) throw CheckpointError("checkpoint truncated");
    std::vector<double> v(n);
    std::memcpy(v.data(), p_ + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  VecX vec() {
    const auto d = doubles();
    return Eigen::Map<const VecX>(d.data(), static_cast<Eigen::Index>(d.size()));
  }
  MatX mat() {
    const auto r = pod<std::int32_t>(), c = pod<std::int32_t>();
    const auto d = doubles();
    if (r < 0 || c < 0 || d.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c))
      throw CheckpointError("checkpoint matrix shape corrupt");
    return Eigen::Map<const MatX>(d.data(), r, c);
  }
  GridField field(const AnnulusGrid& g) {
    const auto nc = pod<std::int32_t>(), nr = pod<std::int32_t>(), nt = pod<std::int32_t>();
    const double t = pod<double>();
    const auto ghosts = pod<std::uint8_t>();
    auto data = doubles();
    if (nc == 0 && data.empty()) return GridField();
    if (nr != g.n_r() || nt != g.n_theta() || nc < 1 || nc > 16)
      throw CheckpointError("checkpoint field shape does not match the configured grid");
    GridField f(g, nc, t);
    if (data.size() != f.raw().size()) throw CheckpointError("checkpoint field size corrupt");
    f.raw() = std::move(data);
    if (ghosts) f.mark_ghosts_filled();
    else f.mark_ghosts_stale();
    return f;
  }
  bool done() const { return pos_ == n_; }

 private:
  void need(std::size_t k) const {
    if (k > n_ - pos_) throw CheckpointError("checkpoint truncated");
  }
  const char* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

void write_rigid(Writer& w, const RigidState& r) {
  w.pod<double>(r.t);
  w.vec(r.q);
  w.mat(r.Q);
  w.vec(r.a);
  w.vec(r.omega);
}

RigidState read_rigid(Reader& rd) {
  RigidState r;
  r.t = rd.pod<double>();
  r.q = rd.vec();
  r.Q = rd.mat();
  r.a = rd.vec();
  r.omega = rd.vec();
  if (r.q.size() != 2 || r.Q.rows() != 2 || r.Q.cols() != 2 || r.a.size() != 2 || r.omega.size() != 1)
    throw CheckpointError("checkpoint rigid state corrupt");
  return r;
}

std::vector<GridField TransformAtlas::*> atlas_fields() {
  return {&TransformAtlas::X,        &TransformAtlas::X_jac,       &TransformAtlas::Y_jac,
          &TransformAtlas::X_hess,   &TransformAtlas::g_lo,        &TransformAtlas::g_up,
          &TransformAtlas::christoffel, &TransformAtlas::Xdot,     &TransformAtlas::Xdot_jac,
          &TransformAtlas::Ydot,     &TransformAtlas::div_gup,     &TransformAtlas::g_gamma,
          &TransformAtlas::zeroth,   &TransformAtlas::X_residual};
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  const SimState& s = cp.state;
  const AnnulusGrid& g = s.atlas->grid();
  Writer w;
  w.pod<std::int32_t>(g.n_r());
  w.pod<std::int32_t>(g.n_theta());
  w.pod<double>(s.flow.t);
  w.pod<double>(cp.dt);
  w.pod<std::int64_t>(cp.step);
  w.pod<std::uint64_t>(s.flow.atlas_ref);
  w.field(s.flow.U);
  w.field(s.flow.P);
  write_rigid(w, s.rigid);
  const TransformAtlas& a = *s.atlas;
  w.pod<double>(a.t);
  w.pod<std::uint64_t>(a.id);
  w.pod<std::uint8_t>(a.has_time_derivatives ? 1 : 0);
  w.pod<double>(a.body_q.x());
  w.pod<double>(a.body_q.y());
  w.mat(a.body_Q);
  for (auto f : atlas_fields()) w.field(a.*f);
  const EnergyLedger& L = cp.ledger;
  for (double v : {L.t, L.E_total, L.E_extended, L.D_visc, L.D_slip, L.E0, L.defect, L.last_visc_rate,
                   L.last_slip_rate})
    w.pod<double>(v);

  const std::string& payload = w.data();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof kMagic);
  const std::uint32_t version = kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  const std::uint64_t len = payload.size(), sum = fnv1a(payload.data(), payload.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(reinterpret_cast<const char*>(&sum), sizeof sum);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw CheckpointError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path, const SimConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t header = sizeof kMagic + sizeof(std::uint32_t) + 2 * sizeof(std::uint64_t);
  if (bytes.size() < header) throw CheckpointError("checkpoint truncated (header)");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw CheckpointError("not a slipfsi checkpoint (bad magic)");
  std::uint32_t version;
  std::uint64_t len, sum;
  std::memcpy(&version, bytes.data() + 8, sizeof version);
  std::memcpy(&len, bytes.data() + 12, sizeof len);
  std::memcpy(&sum, bytes.data() + 20, sizeof sum);
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  if (bytes.size() - header != len) throw CheckpointError("checkpoint truncated (payload)");
  const char* payload = bytes.data() + header;
  if (fnv1a(payload, len) != sum) throw CheckpointError("checkpoint checksum mismatch");

  const AnnulusGrid g = config.make_grid();
  Reader rd(payload, len);
  const auto nr = rd.pod<std::int32_t>(), nt = rd.pod<std::int32_t>();
  if (nr != g.n_r() || nt != g.n_theta())
    throw CheckpointError("checkpoint grid " + std::to_string(nr) + "x" + std::to_string(nt) +
                          " does not match the configured grid");
  Checkpoint cp;
  SimState& s = cp.state;
  s.flow.t = rd.pod<double>();
  cp.dt = rd.pod<double>();
  cp.step = rd.pod<std::int64_t>();
  s.flow.atlas_ref = rd.pod<std::uint64_t>();
  s.flow.U = rd.field(g);
  s.flow.P = rd.field(g);
  s.rigid = read_rigid(rd);
  auto atlas = std::make_shared<TransformAtlas>();
  atlas->coords = std::make_shared<ReferenceCoordinates>(g);
  atlas->t = rd.pod<double>();
  atlas->id = rd.pod<std::uint64_t>();
  atlas->has_time_derivatives = rd.pod<std::uint8_t>() != 0;
  const double bx = rd.pod<double>(), by = rd.pod<double>();
  atlas->body_q = Vec2(bx, by);
  const MatX BQ = rd.mat();
  if (BQ.rows() != 2 || BQ.cols() != 2) throw CheckpointError("checkpoint atlas pose corrupt");
  atlas->body_Q = BQ;
  for (auto f : atlas_fields()) (*atlas).*f = rd.field(g);
  EnergyLedger& L = cp.ledger;
  for (double* v : {&L.t, &L.E_total, &L.E_extended, &L.D_visc, &L.D_slip, &L.E0, &L.defect,
                    &L.last_visc_rate, &L.last_slip_rate})
    *v = rd.pod<double>();
  if (!rd.done()) throw CheckpointError("checkpoint has trailing data");
  s.atlas = atlas;
  return cp;
}

// ---------------------------------------------------------------------------
// Manifest

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["seed"] = m.seed;
  j["start_time"] = m.start_time;
  j["end_time"] = m.end_time;
  j["status"] = m.status;
  if (!m.message.empty()) j["message"] = m.message;
  j["outputs"] = m.outputs;
  j["config"] = m.config_yaml;
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write manifest in '" + dir + "'");
  out << manifest_json(m);
}

// ---------------------------------------------------------------------------
// Drivers

std::vector<std::string> simulate(const SimConfig& config, const std::string& out_dir,
                                  const SimulateOptions& opt) {
  fs::create_directories(out_dir);
  FluidSolver solver(config);
  Checkpoint cp;
  if (!opt.restore.empty()) {
    cp = load_checkpoint(opt.restore, config);
  } else {
    cp.state = solver.initialize();
    cp.ledger = energy_start(cp.state, solver);
    cp.dt = config.dt > 0.0 ? config.dt : solver.auto_dt(cp.state);
    cp.step = 0;
  }
  const Schedule sch = make_schedule(cp.state.flow.t, config.t_end, cp.dt);
  if (opt.restore.empty() && sch.steps > 0) cp.dt = sch.dt;

  std::vector<std::string> files;
  const std::string traj_path = (fs::path(out_dir) / "trajectory.csv").string();
  const std::string energy_path = (fs::path(out_dir) / "energy.csv").string();
  CsvWriter traj(traj_path, trajectory_columns());
  CsvWriter energy(energy_path, energy_columns());
  files.push_back("trajectory.csv");
  files.push_back("energy.csv");
  auto dump = [&](const SimState& s, std::int64_t step) {
    char name[64];
    std::snprintf(name, sizeof name, "fields_%06" PRId64 ".csv", step);
    write_field_dump((fs::path(out_dir) / name).string(), s);
    files.push_back(name);
  };
  if (opt.restore.empty()) {
    traj.row(trajectory_row(cp.state));
    energy.row(energy_row(cp.ledger));
    dump(cp.state, 0);
  }
  SimState s = cp.state;
  EnergyLedger L = cp.ledger;
  std::int64_t step = cp.step;
  // Restored runs keep the stored step size; fresh runs use the schedule.
  const double dt = opt.restore.empty() ? sch.dt : cp.dt;
  const int steps = opt.restore.empty()
                        ? sch.steps
                        : (dt > 0.0 ? static_cast<int>(std::llround((config.t_end - s.flow.t) / dt)) : 0);
  for (int n = 0; n < steps; ++n) {
    s = solver.step(s, dt);
    ++step;
    L = energy_update(s, solver, L, dt);
    traj.row(trajectory_row(s));
    energy.row(energy_row(L));
    if (config.dump_every > 0 && step % config.dump_every == 0) dump(s, step);
  }
  traj.flush();
  energy.flush();
  if (!opt.checkpoint.empty()) {
    Checkpoint out{s, L, dt > 0.0 ? dt : cp.dt, step};
    save_checkpoint(opt.checkpoint, out);
  }
  return files;
}

void write_gap_csv(const std::string& path, const std::vector<GapReport>& reports) {
  CsvWriter w(path, gap_columns());
  for (const GapReport& r : reports) {
    w.comment("delta=" + format_number(r.delta));
    for (std::size_t k = 0; k < r.times.size(); ++k)
      w.row({r.times[k], r.gap_L2[k], r.gap_a[k], r.gap_omega[k], r.integrand[k]});
  }
}

}  // namespace slipfsi
