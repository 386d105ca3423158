#pragma once

// Output files, checkpoints, run manifests and the simulate driver.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "slipfsi/config.hpp"
#include "slipfsi/solver.hpp"
#include "slipfsi/verification.hpp"

namespace slipfsi {

inline constexpr const char* kVersion = "0.1.0";

/// Comma-separated rows with a fixed header; numbers printed with %.17g.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void comment(const std::string& text);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t ncols_;
};

std::string format_number(double v);

const std::vector<std::string>& trajectory_columns();
const std::vector<std::string>& energy_columns();
const std::vector<std::string>& gap_columns();

std::vector<double> trajectory_row(const SimState& s);
std::vector<double> energy_row(const EnergyLedger& L);

/// Text header (lines starting with '#') followed by one CSV row per node.
void write_field_dump(const std::string& path, const SimState& s);

struct Checkpoint {
  SimState state;
  EnergyLedger ledger;
  double dt = 0.0;
  std::int64_t step = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Checkpoint& cp);
/// Throws CheckpointError on bad magic, version or grid mismatch, truncation
/// or checksum failure; nothing is returned in that case.
Checkpoint load_checkpoint(const std::string& path, const SimConfig& config);

struct RunManifest {
  std::string command;
  std::string config_yaml;
  std::string version = kVersion;
  std::string start_time;
  std::string end_time;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string message;
};

std::string manifest_json(const RunManifest& m);
void write_manifest(const std::string& dir, const RunManifest& m);
std::string utc_now();

struct SimulateOptions {
  std::string restore;     // checkpoint to continue from
  std::string checkpoint;  // checkpoint written at the end
};

/// Full coupled run: trajectory.csv, energy.csv, field dumps every
/// dump_every steps (and the initial snapshot). Returns the written files.
std::vector<std::string> simulate(const SimConfig& config, const std::string& out_dir,
                                  const SimulateOptions& opt = {});

/// Writes gap.csv with one "# delta=" block per report.
void write_gap_csv(const std::string& path, const std::vector<GapReport>& reports);

}  // namespace slipfsi
