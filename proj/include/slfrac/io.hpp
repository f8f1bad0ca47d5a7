#pragma once

#include <string>
#include <utility>
#include <vector>

#include "slfrac/driver.hpp"

namespace slfrac {

inline constexpr const char* kVersion = "0.1.0";

/// Parses flat `key = value` text ('#' starts a comment).  Missing keys keep
/// their defaults; unknown keys, malformed lines, non-numeric values and
/// out-of-range settings raise ConfigError.
SimulationConfig parse_config(const std::string& text);
SimulationConfig load_config(const std::string& path);

/// Every key with its current value, one per line, in parse_config syntax.
std::string echo_config(const SimulationConfig& cfg);

using PointField = std::pair<std::string, const NodalField*>;
using CellField = std::pair<std::string, const std::vector<double>*>;

/// Legacy ASCII VTK unstructured grid.  Throws Error on an unwritable path and
/// MeshMismatch for fields of another mesh.
void write_vtk(const Mesh& mesh, const std::vector<PointField>& point_data, const std::vector<CellField>& cell_data,
               const std::string& path);

void write_energy_csv(const std::vector<EnergyRecord>& records, const std::string& path);
void write_iteration_log(const std::vector<IterationRow>& rows, const std::string& path);

struct RunManifest {
  std::string config_echo;
  std::string version = kVersion;
  std::string start_time;
  std::string end_time;
  std::vector<std::string> files;
  std::size_t steps = 0;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

}  // namespace slfrac
