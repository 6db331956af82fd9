#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "lpvred/sdr.hpp"
#include "lpvred/sor.hpp"
#include "lpvred/trajectory.hpp"

namespace lpvred {

using nlohmann::json;

/// Shortest round-trip decimal representation; infinities render as
/// "inf"/"-inf", used as CSV sentinels.
std::string fmt_double(double v);
double parse_double(const std::string& s);

json model_to_json(const AffineLpvSs& model);
AffineLpvSs model_from_json(const json& j);

json coder_to_json(const SchedulingCoder& c);
SchedulingCoder coder_from_json(const json& j);

json sor_result_to_json(const SorResult& r, double cpu_seconds);
json sdr_result_to_json(const SdrResult& r, double cpu_seconds);

/// A reduction result read back from disk; exactly one of sor/sdr is set.
struct ReductionRecord {
    std::string kind;  // "sor" or "sdr"
    std::optional<SorResult> sor;
    std::optional<SdrResult> sdr;
    double cpu_seconds = 0.0;
};
ReductionRecord reduction_from_json(const json& j);

/// Trajectory CSV with header t,u1..,x1..,y1..,p1.. (one row per sample).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Generic matrix CSV with a caller-provided header line (columns named).
void write_matrix_csv(const std::filesystem::path& path, const std::string& header,
                      const MatrixXd& columns_are_samples);
MatrixXd read_matrix_csv(const std::filesystem::path& path, std::string* header = nullptr);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace lpvred
