#pragma once

// Report artifacts: report.json / summary.csv / convergence.dat for studies,
// oracle.json for the stationary side, and the documented JSON layouts for
// packets and S-matrices (grid, fiber dim, interleaved re/im arrays).
// All files are written atomically (temp + rename) and contain no wall-clock
// data, so a rerun reproduces them bit for bit.

#include <json.hpp>

#include <string>

#include "tdlab/delay.hpp"

namespace tdlab {

using ordered_json = nlohmann::ordered_json;

ordered_json packet_to_json(const SpectralPacket& packet);
SpectralPacket packet_from_json(const ordered_json& j);  // no evaluator

ordered_json smatrix_to_json(const FiberSMatrix& s);
FiberSMatrix smatrix_from_json(const ordered_json& j);  // no evaluator

ordered_json report_to_json(const DelayReport& report);
DelayReport report_from_json(const ordered_json& j);  // self-contained part

std::string summary_csv(const DelayReport& report);
std::string convergence_dat(const DelayReport& report);

void atomic_write(const std::string& path, const std::string& content);

// report.json + summary.csv + convergence.dat under `dir`.
void write_report_files(const DelayReport& report, const std::string& dir);

// oracle.json (stationary references only) under `dir`.
void write_oracle_files(const DelayReport& report, const std::string& dir);

}  // namespace tdlab
