#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmsd/maxwell_sd.hpp"
#include "vmsd/mesh.hpp"
#include "vmsd/sparse.hpp"
#include "vmsd/vlasov_sd.hpp"

namespace vmsd::driver {

/// Streaming Weibel parameters. x is the physical coordinate on [0, L].
struct WeibelCase {
    double mu = 0.5;
    double v01 = -0.3;
    double v02 = -0.3;
    double k0 = 0.2;
    double beta = 0.01;
    double b = 0.001;

    double length() const;
    static WeibelCase preset(int id);
};

/// f0 = exp(-v1^2/beta)/(pi beta) [mu exp(-(v2-v01)^2/beta) + (1-mu) exp(-(v2+v02)^2/beta)]
double weibel_density(const WeibelCase& c, double v1, double v2);
/// B0(x) = -b sin(k0 x); E0 = 0.
double weibel_magnetic(const WeibelCase& c, double x);

/// Initial data in normalized x in [0, 1].
struct InitialData {
    std::function<double(double x, double v1, double v2)> density;
    std::function<vlasov::FieldPoint(double x)> field;
};

InitialData weibel_initial(const WeibelCase& c);

/// Mesh set: slab length, normalized x-cell size and velocity cells per direction.
struct MeshPreset {
    std::string name;
    double ht = 0.1;
    double hx = 0.1;
    int v_cells = 6;
};

/// H1, H2, H3.
MeshPreset mesh_preset(const std::string& name);

struct Discretization {
    int x_cells = 10;
    int v_cells1 = 6;
    int v_cells2 = 6;
    mesh::Interval v1{-1.0, 1.0};
    mesh::Interval v2{-1.0, 1.0};
    int degree = 1;
    double final_time = 5.0;
    int slabs = 50;
    mesh::DeltaRule delta = mesh::UniformDelta{1, 0.05};
    bool relativistic = false;
    int max_iterations = 5;
    double tolerance = 1e-8;
    sparse::SolverOptions solver{};
};

struct IterationLog {
    std::vector<double> residuals;  // relative change of f per iteration
    bool converged = false;
};

struct TrajectoryRow {
    double t = 0.0;
    double e1 = 0.0;
    double e2 = 0.0;
    double b = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double mass = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Energy diagnostics of a state: E_i = 1/2 int E_i^2, B likewise, and
/// K_i = 1/2 int int v_i^2 f over normalized x (the 1/(2L) physical average).
TrajectoryRow energies(const sd::SlabSpace& field_space, const vlasov::PhaseGrid& grid,
                       std::span<const double> field_trace, std::span<const double> density_trace);

/// Slab-by-slab coupled solver: each slab runs the fixed-point loop
///   j(f^{i-1}) -> Maxwell -> W^i -> G(W^i) -> Vlasov -> f^i.
class CoupledSolver {
public:
    CoupledSolver(const Discretization& d, double length);
    ~CoupledSolver();

    const Discretization& discretization() const { return disc_; }
    const vlasov::PhaseGrid& grid() const { return *grid_; }
    const sd::SlabSpace& field_space() const { return *field_space_; }
    const mesh::HpAssignment& field_hp() const { return field_hp_; }
    const mesh::HpAssignment& phase_hp() const { return phase_hp_; }
    const mesh::TimePartition& time() const { return time_; }

    /// L2 projection of initial data onto the trace spaces.
    void set_initial(const InitialData& data);
    void set_state(std::vector<double> field_trace, std::vector<double> density_trace);
    const std::vector<double>& field_trace() const { return field_; }
    const std::vector<double>& density_trace() const { return density_; }

    /// Fixed-point iteration on slab m; advances the stored traces.
    IterationLog step(int m);

    TrajectoryRow diagnostics(double t) const;

    /// All slabs in order; the callback sees the row at every slab end (and t = 0).
    std::vector<TrajectoryRow> run(const std::function<void(const TrajectoryRow&)>& on_row = {});

    /// Last slab's solutions (kept for the norm identities and snapshots).
    const maxwell::FieldState& last_field() const { return last_field_; }
    const vlasov::DensityState& last_density() const { return last_density_; }

private:
    Discretization disc_;
    double length_;
    mesh::TimePartition time_;
    std::unique_ptr<vlasov::PhaseGrid> grid_;
    std::unique_ptr<sd::SlabSpace> field_space_;
    mesh::HpAssignment field_hp_;
    mesh::HpAssignment phase_hp_;
    std::unique_ptr<maxwell::SlabSolver> maxwell_;
    std::unique_ptr<vlasov::SlabSolver> vlasov_;
    std::vector<double> field_;
    std::vector<double> density_;
    maxwell::FieldState last_field_;
    vlasov::DensityState last_density_;
};

struct Trajectory {
    std::vector<TrajectoryRow> rows;
    std::vector<double> field_trace;    // final
    std::vector<double> density_trace;  // final
    int unconverged_slabs = 0;
};

Trajectory march(const Discretization& d, const WeibelCase& c,
                 const std::function<void(const TrajectoryRow&)>& on_row = {});

/// (f, E, B) -> (f(., -v), E, -B) on traces.
void reverse_state(const vlasov::PhaseGrid& grid, std::vector<double>& field_trace,
                   std::vector<double>& density_trace);

struct ErrorEntry {
    std::string unknown;
    std::string norm;
    double value = 0.0;
};

/// Forward run to T, reversal, second run to T, then L1 and L2 distances of
/// the final state from the reversed initial data (f0(x,-v), E0, -B0).
std::vector<ErrorEntry> reversibility_test(const Discretization& d, const WeibelCase& c);

}  // namespace vmsd::driver
