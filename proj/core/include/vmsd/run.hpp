#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vmsd/config.hpp"
#include "vmsd/convergence.hpp"
#include "vmsd/driver.hpp"

namespace vmsd::io {

std::string version();

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);
void write_atomic(const std::filesystem::path& path, std::span<const char> bytes);

/// Header t,E1,E2,B,K1,K2,mass,iters,residual; one row per trajectory entry.
std::string trajectory_csv(const std::vector<driver::TrajectoryRow>& rows);
/// Header unknown,norm,value.
std::string reversibility_csv(const std::vector<driver::ErrorEntry>& entries);
/// Header h,k,l2_error,h_norm_error,triple_norm_error,observed_order (order of the L2 error).
std::string nitsche_csv(const std::vector<convergence::NitscheRow>& rows);

struct SdSeries {
    std::string problem;
    int degree = 1;
    std::vector<convergence::SdRow> rows;
};
/// Header problem,degree,cells,h,k,l2_error,observed_order.
std::string sd_csv(const std::vector<SdSeries>& series);

/// Flat dump of the field trace followed by the density trace, plus a JSON
/// sidecar with the mesh, degree, node coordinates and block layout.
void write_snapshot(const std::filesystem::path& stem, const driver::CoupledSolver& solver, double t, int slab,
                    const std::string& format, double length);

struct RunResult {
    std::vector<std::filesystem::path> artifacts;
    double wall_seconds = 0.0;
};

/// Runs the configured mode, writes its CSVs into c.directory and a
/// manifest.json with config hash, version, wall time and artifact list.
/// Progress lines go to log when given.
RunResult run(const config::RunConfig& c, std::ostream* log = nullptr);

}  // namespace vmsd::io
