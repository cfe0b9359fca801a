#pragma once

// File formats. JSON documents share an envelope
//   {"format_version": 1, "kind": "<kind>", "payload": {...}}
// CSV files use ';' as separator and '.' as decimal point with a leading
// "# key=value" comment line. Every parser either returns a value or throws
// ParseError; no other exception escapes.

#include "dmpanim/dmp.hpp"
#include "dmpanim/kinematics.hpp"
#include "dmpanim/principles.hpp"
#include "dmpanim/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace dmpanim::io {

inline constexpr int kFormatVersion = 1;

enum class FileKind { Demonstration, Model, Modulation, Robot, Trajectory };

std::string_view kind_name(FileKind kind);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Envelopes -----------------------------------------------------------------

nlohmann::json wrap(FileKind kind, nlohmann::json payload);
/// Checks version and kind, returns the payload.
nlohmann::json unwrap(const nlohmann::json& document, FileKind expected);

// Payload conversions (used by the service to embed documents) ---------------

nlohmann::json demo_payload(const Demonstration& demo);
Demonstration demo_from_payload(const nlohmann::json& payload);
nlohmann::json model_payload(const DmpModel& model);
DmpModel model_from_payload(const nlohmann::json& payload);
nlohmann::json modulation_payload(const ModulationConfig& config);
/// Structural checks only; range rules are left to ModulationConfig::validate.
ModulationConfig modulation_from_payload(const nlohmann::json& payload);
nlohmann::json robot_payload(const RobotConfig& robot);
RobotConfig robot_from_payload(const nlohmann::json& payload);
nlohmann::json trajectory_payload(const Trajectory& trajectory);
Trajectory trajectory_from_payload(const nlohmann::json& payload);

// Text formats ----------------------------------------------------------------

Demonstration parse_demo_csv(std::string_view text);
std::string write_demo_csv(const Demonstration& demo);
Demonstration parse_demo_json(std::string_view text);
std::string write_demo_json(const Demonstration& demo);

DmpModel parse_model_json(std::string_view text);
std::string write_model_json(const DmpModel& model);

ModulationConfig parse_modulation_json(std::string_view text);
std::string write_modulation_json(const ModulationConfig& config);

RobotConfig parse_robot_json(std::string_view text);
std::string write_robot_json(const RobotConfig& robot);

Trajectory parse_trajectory_json(std::string_view text);
std::string write_trajectory_json(const Trajectory& trajectory);
/// Columns: time, then pos/vel/acc per dimension, then phase.
Trajectory parse_trajectory_csv(std::string_view text);
std::string write_trajectory_csv(const Trajectory& trajectory);

enum class TrajectoryFormat { Csv, Json };
std::string export_trajectory(const Trajectory& trajectory, TrajectoryFormat format);

// Files -------------------------------------------------------------------------

/// Throws ParseError naming the path when the file cannot be read.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Chooses CSV or JSON from the extension.
Demonstration load_demo(const std::filesystem::path& path);
DmpModel load_model(const std::filesystem::path& path);
ModulationConfig load_modulation(const std::filesystem::path& path);
RobotConfig load_robot(const std::filesystem::path& path);
TrajectoryFormat format_for(const std::filesystem::path& path);

}  // namespace dmpanim::io
