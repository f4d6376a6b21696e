#pragma once

/**
 * @file io.hpp
 * @brief Readers and writers for trajectories, measurement logs, estimation
 *        results and the tabular plot data. Doubles are written with 17
 *        significant digits so every file reads back to identical values.
 */

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ffid/control.hpp"
#include "ffid/estimation.hpp"
#include "ffid/measurement_log.hpp"
#include "ffid/trajectory.hpp"

namespace ffid {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string format_double(double v);
/// Parses a full token as a double ("inf", "-inf", "nan" accepted). Throws
/// invalid_input on trailing garbage.
double parse_double(const std::string& token);

std::string read_text_file(const fs::path& path);
/// Creates parent directories as needed.
void write_text_file(const fs::path& path, const std::string& content);

/// A header plus rows of numeric cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a column; throws invalid_input if absent.
  std::size_t column(const std::string& name) const;
};

std::string to_csv(const CsvTable& table);
/// Throws invalid_input on a malformed table.
CsvTable parse_csv(const std::string& text);

// Trajectories ---------------------------------------------------------------

Json to_json(const FourierTrajectory& traj);
FourierTrajectory trajectory_from_json(const Json& j);
void save_trajectory(const fs::path& path, const FourierTrajectory& traj);
/// Throws config when the file is missing or malformed.
FourierTrajectory load_trajectory(const fs::path& path);

// Measurement logs -------------------------------------------------------------

/// Sidecar holding the log metadata: "<stem>.meta.json" beside the CSV.
fs::path metadata_path(const fs::path& csv_path);

Json to_json(const LogMetadata& meta);
LogMetadata metadata_from_json(const Json& j);

/// Writes the CSV (t, x, y, z, phi, theta, psi, u1..u6, sat_flag) and sidecar.
void save_log(const fs::path& csv_path, const MeasurementLog& log);
/// Reads CSV and sidecar; throws invalid_log on malformed or inconsistent data.
MeasurementLog load_log(const fs::path& csv_path);

// Estimation results -------------------------------------------------------

Json to_json(const ParameterErrors& e);
ParameterErrors errors_from_json(const Json& j);
Json to_json(const EstimationResult& r);
EstimationResult result_from_json(const Json& j);
void save_result(const fs::path& path, const EstimationResult& r);
EstimationResult load_result(const fs::path& path);

// Plot data ----------------------------------------------------------------

/// n, residual, physical, rank, cond_W and, when available, the parameter
/// errors (NaN when unknown).
CsvTable sweep_table(const HarmonicSelection& sel);
/// t, P, Tdot.
CsvTable energy_table(const EnergyTrace& trace);
/// t, reference pose (6) and logged pose (6).
CsvTable tracking_table(const MeasurementLog& log, const FourierTrajectory& reference);

void save_table(const fs::path& path, const CsvTable& table);
CsvTable load_table(const fs::path& path);

}  // namespace ffid
