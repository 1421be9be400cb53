#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace dbo {

// Files a run leaves behind in its output directory.
inline constexpr const char* kResolvedConfigName = "config.resolved.cfg";
inline constexpr const char* kDboSnapshotName = "snapshots.dbo";
inline constexpr const char* kFomSnapshotName = "snapshots.fom";
inline constexpr const char* kDiagnosticsName = "diagnostics.csv";
inline constexpr const char* kIpcaName = "ipca.csv";

// Factored low-rank run: snapshots.dbo + diagnostics.csv.
void run_dbo(const RunConfig& cfg, bool quiet);

// Full-order run: snapshots.fom + ipca.csv (instantaneous spectra).
void run_fom(const RunConfig& cfg, bool quiet);

// Consumes one factored and one full-order run, matches snapshot times, and
// writes compare_error.csv (relative error and the per-time optimum) and
// compare_spectra.csv (per-mode gaps and principal angles).
void compare_runs(const std::string& dbo_dir, const std::string& fom_dir,
                  const std::string& out_dir, bool quiet);

// Columnar plain-text data for the benchmark plots: species profiles at the
// final time, error vs time per run, singular values vs time (factored and
// instantaneous-SVD reference).
void export_figures(const std::string& fom_dir, const std::vector<std::string>& dbo_dirs,
                    const std::string& out_dir, bool quiet);

std::string timestamp_utc();
void log_info(bool quiet, const std::string& msg);

}  // namespace dbo
