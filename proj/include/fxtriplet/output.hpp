#pragma once

// CSV and JSON writers. Floating-point values are printed with 17 significant
// digits so every table round-trips exactly.

#include "fxtriplet/experiment.hpp"
#include "fxtriplet/neutral_solver.hpp"
#include "fxtriplet/robust_solver.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fxtriplet {

std::string fmt17(double v);

/// FNV-1a 64 of a byte string, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

std::string h_table_csv(const HSolution& h);
std::string h1_table_csv(const RobustCorrection& h1);
std::string paths_csv(const BatchResult& b);
std::string trajectories_csv(const BatchResult& b);
std::string trajectories_mean_csv(const TrajectoryAccumulator& acc);
std::string frontier_csv(const PhiSweepResult& r);
std::string exceedance_csv(const PhiSweepResult& r, const std::vector<double>& x_percent);
std::string penalty_csv(const std::vector<PenaltyRow>& rows);

nlohmann::json stats_json(const PnLStats& s);
nlohmann::json improvement_json(const ImprovementStats& s);
/// Non-finite numbers become null in JSON.
nlohmann::json number_or_null(double v);

}  // namespace fxtriplet
