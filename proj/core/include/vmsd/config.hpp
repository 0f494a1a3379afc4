#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vmsd/driver.hpp"

namespace vmsd::config {

enum class Mode { weibel_run, reversibility, sd_convergence, nitsche_convergence, ritz_study };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/// Every experiment parameter. Mesh keys left unset are filled from the preset.
struct RunConfig {
    Mode mode = Mode::weibel_run;
    std::uint64_t seed = 0;

    // [case]
    int case_id = 1;
    double mu = 0.5;
    double v01 = -0.3;
    double v02 = -0.3;
    double k0 = 0.2;
    double beta = 0.01;
    double b = 0.001;

    // [mesh]
    std::string preset = "H1";
    std::optional<int> x_cells;
    std::optional<int> v_cells1;
    std::optional<int> v_cells2;
    double v1_min = -1.0;
    double v1_max = 1.0;
    double v2_min = -1.0;
    double v2_max = 1.0;

    // [time]
    double final_time = 5.0;
    std::optional<int> slabs;

    // [method]
    int degree = 1;
    std::string delta_rule = "uniform";
    double delta = 0.05;
    double c1 = 0.5;
    double c2 = 0.5;
    bool relativistic = false;

    // [iteration]
    int max_iterations = 5;
    double iteration_tolerance = 1e-8;

    // [solver]
    std::string solver = "auto";
    double solver_tolerance = 1e-10;
    int solver_max_iterations = 10000;
    int restart = 50;
    int direct_limit = 2000;

    // [convergence]
    std::string problem = "both";
    std::vector<int> convergence_cells{4, 8, 16};
    double convergence_time = 0.5;

    // [nitsche]
    double gamma = 10.0;
    std::vector<int> nitsche_cells{4, 8, 16, 32};
    double nitsche_time = 1.0;
    double step_ratio = 1.0;

    // [output]
    std::string directory = "out";
    std::vector<double> snapshot_times;
    std::string snapshot_format = "text";

    bool operator==(const RunConfig&) const = default;

    driver::WeibelCase weibel_case() const;
    /// Resolved solver mesh: preset values unless overridden.
    driver::Discretization discretization() const;
};

/// Parses the sectioned key = value text. Missing keys keep their defaults;
/// `case` in [case] loads that preset before the explicit values apply.
/// Unknown sections or keys, malformed values and constraint violations
/// raise InvalidConfig naming the key path.
RunConfig parse(const std::string& text);
RunConfig parse_file(const std::string& path);

/// Canonical text; parse(render(c)) == c.
std::string render(const RunConfig& c);

/// Lowercase hex SHA-256 of the canonical text.
std::string hash(const RunConfig& c);

}  // namespace vmsd::config
