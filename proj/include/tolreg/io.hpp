#pragma once

// Bit-stable artifact I/O: CSV with 17-significant-digit formatting (exact
// double round-trips, C locale, LF endings) and JSON manifests.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "tolreg/param_choice.hpp"
#include "tolreg/solver.hpp"

namespace tolreg {

// %.17g with '.' as decimal separator regardless of the global locale.
std::string g17(double x);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Two columns `x,value`, one header line.
void write_signal_csv(const std::filesystem::path& path, const Signal<double>& s);

// Rebuilds the grid from the x column; spacing must be uniform to 1e-9
// relative.  Needs at least two rows to infer the spacing.
Signal<double> read_signal_csv(const std::filesystem::path& path);

// `iter,objective,residual,penalty`, one row per recorded iterate.
void write_history_csv(const std::filesystem::path& path,
                       const SolveResult<double>& result);

// `alpha,residual,penalty`.
void write_lcurve_csv(const std::filesystem::path& path,
                      const LCurveResult<double>& result);

// `alpha,G,threshold,feasible`.
void write_morozov_csv(const std::filesystem::path& path,
                       const DiscrepancyReport<double>& report);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace tolreg
