#pragma once

#include <span>
#include <vector>

#include "vmsd/nitsche.hpp"
#include "vmsd/sparse.hpp"

namespace vmsd::convergence {

/// One refinement level of a space-time study.
struct SdRow {
    int cells = 0;
    double h = 0.0;
    double k = 0.0;
    double error = 0.0;
    double order = 0.0;  // log2(previous / current); 0 on the first row
};

struct SdStudy {
    int degree = 1;
    double final_time = 1.0;
    double delta = 0.05;
    sparse::SolverOptions solver{};
};

/// 1.5D Maxwell with the manufactured solution
///   E1 = sin(2 pi x) sin(2 pi t), E2 = sin(2 pi x) cos(2 pi t), B = -cos(2 pi x) sin(2 pi t)
/// on the periodic unit interval, k = h; error in L2 over the space-time domain.
std::vector<SdRow> maxwell_manufactured(const SdStudy& study, std::span<const int> cells);

/// Free streaming f_t + v1 f_x = 0 of f0 = sin(2 pi x) (1 - v1^2)^2 (1 - v2^2)^2 on
/// [0,1) x [-1,1]^2 against the characteristics f0(x - v1 t, v). k = T / (cells / 2)
/// unless that yields fewer than one slab.
std::vector<SdRow> free_streaming(const SdStudy& study, std::span<const int> cells);

/// Fills the order column from consecutive errors.
void fill_orders(std::vector<SdRow>& rows);

/// Row of the Nitsche studies (h, k, errors, order of the L2 error).
struct NitscheRow {
    double h = 0.0;
    double k = 0.0;
    nitsche::FieldErrors error;
    double l2_order = 0.0;
    double h_order = 0.0;
    double triple_order = 0.0;
};

/// Divergence-free field u = curl psi, psi = sin^2(pi x) sin^2(pi y), vanishing on the boundary.
/// Writes (u1, u2, curl u).
void manufactured_field(std::span<const double> x, std::span<double> out);
/// curl curl u of the manufactured field (two entries).
void manufactured_curl_curl(std::span<const double> x, std::span<double> out);

/// ||u - Q_h u|| on the unit square for each cell count.
std::vector<NitscheRow> ritz_study(double gamma, std::span<const int> cells);

/// Three-level scheme for E = cos(t) u(x), j_t = -E_tt - curl curl E, Taylor start-up,
/// k = ratio * h, errors at final_time (rounded to whole steps).
std::vector<NitscheRow> nitsche_convergence(double gamma, std::span<const int> cells, double final_time,
                                            double ratio);

}  // namespace vmsd::convergence
