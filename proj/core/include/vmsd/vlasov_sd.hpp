#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "vmsd/maxwell_sd.hpp"
#include "vmsd/mesh.hpp"
#include "vmsd/space_time.hpp"
#include "vmsd/sparse.hpp"

namespace vmsd::vlasov {

/// v / sqrt(1 + |v|^2) when relativistic, v otherwise.
std::vector<double> vhat(std::span<const double> v, bool relativistic);

/// d vhat_i / d v_j, symmetric by construction (identity when non-relativistic).
std::vector<double> vhat_jacobian(std::span<const double> v, bool relativistic);

/// Electric and magnetic field at one point. In the reduced mode only e[0],
/// e[1] and b[2] are read.
struct FieldPoint {
    std::array<double, 3> e{};
    std::array<double, 3> b{};
};

/// Phase-space velocity G = (vhat * x_scale, E + vhat x B) built from a field evaluator.
struct TransportField {
    maxwell::FieldMode mode = maxwell::FieldMode::reduced1half;
    bool relativistic = false;
    double x_scale = 1.0;
    std::function<FieldPoint(double t, std::span<const double> x)> field;
};

/// G at (t, x, v); size dim_x + dim_v (3 reduced, 6 full).
std::vector<double> transport_eval(const TransportField& g, double t, std::span<const double> x,
                                   std::span<const double> v);

/// Analytic phase-space divergence of G at a velocity for given fields. E and
/// B do not depend on v and vhat does not depend on x, so only the magnetic
/// rotation survives; it is summed in cancelling pairs of the symmetric
/// Jacobian and is exactly zero.
double transport_divergence(maxwell::FieldMode mode, bool relativistic, std::span<const double> v,
                            const FieldPoint& field);

/// Phase space (x, v1, v2) of the reduced system: periodic in x, zero
/// Dirichlet on the velocity boundary, plus per-node velocity moment weights.
class PhaseGrid {
public:
    PhaseGrid(mesh::Interval x, int x_cells, mesh::Interval v1, mesh::Interval v2, int v_cells1, int v_cells2,
              int degree, bool relativistic);

    const sd::SlabSpace& phase() const { return phase_; }
    const sd::SlabSpace& velocity() const { return velocity_; }
    const mesh::TensorMesh& x_mesh() const { return x_mesh_; }
    int degree() const { return phase_.degree(); }
    bool relativistic() const { return relativistic_; }
    std::size_t x_nodes() const { return x_nodes_; }
    std::size_t v_nodes() const { return velocity_.spatial_nodes(); }

    /// Velocity moment weights per v-node: integral of w(v) Phi_n(v) dv.
    const std::vector<double>& mass_weights() const { return mass_w_; }
    const std::vector<double>& current_weights(int i) const { return current_w_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& kinetic_weights(int i) const { return kinetic_w_[static_cast<std::size_t>(i)]; }
    /// Integral of each x basis function.
    const std::vector<double>& x_weights() const { return x_w_; }

    /// Phase-space node index of (x node, v node).
    std::size_t node(std::size_t x_node, std::size_t v_node) const { return x_node + x_nodes_ * v_node; }

    /// v -> -v reflection of a trace vector; requires a symmetric velocity box.
    std::vector<double> reflect_velocity(std::span<const double> trace) const;

private:
    mesh::TensorMesh x_mesh_;
    sd::SlabSpace phase_;
    sd::SlabSpace velocity_;
    bool relativistic_;
    std::size_t x_nodes_;
    std::vector<double> mass_w_;
    std::array<std::vector<double>, 2> current_w_;
    std::array<std::vector<double>, 2> kinetic_w_;
    std::vector<double> x_w_;
};

/// Moments of a density trace.
struct Moments {
    double mass = 0.0;
    double kinetic1 = 0.0;  // 1/2 int int v1^2 f
    double kinetic2 = 0.0;
};

Moments trace_moments(const PhaseGrid& grid, std::span<const double> trace);

/// E1, E2, B at the (t, x) quadrature points of every x-cell of one slab,
/// laid out (cell * points + q) * 3 + c.
using FieldSamples = std::vector<double>;

struct DensityState {
    int slab = 0;
    std::vector<double> coefficients;
    std::vector<double> incoming;
    std::vector<double> outgoing;
};

class SlabSolver {
public:
    /// field_space: the (x, 3 component) Maxwell slab space on the same x mesh and degree.
    SlabSolver(const PhaseGrid& grid, const sd::SlabSpace& field_space, double slab_length, double x_scale,
               sparse::SolverOptions options = {});

    const PhaseGrid& grid() const { return *grid_; }
    const sd::CellTables& tables() const { return assembler_.tables(); }
    const sd::CellTables& field_tables() const { return field_tables_; }

    FieldSamples sample(std::span<const double> field_slab) const;
    FieldSamples sample(const std::function<FieldPoint(double t, std::span<const double> x)>& field,
                        double t0) const;
    sd::CoefficientFill coefficients(const FieldSamples& samples) const;

    const sparse::CsrMatrix& assemble(std::span<const double> delta, const FieldSamples& samples);

    DensityState solve(int slab, std::span<const double> delta, std::span<const double> incoming,
                       const FieldSamples& samples, std::span<const double> guess = {},
                       sparse::SolveReport* report = nullptr);

    /// Current (j1, j2, 0) of a density slab vector as a field slab vector.
    std::vector<double> current(std::span<const double> density_slab) const;

private:
    const PhaseGrid* grid_;
    const sd::SlabSpace* field_space_;
    double x_scale_;
    sparse::SolverOptions options_;
    sd::StreamingAssembler assembler_;
    sd::CellTables field_tables_;
    sparse::CsrMatrix matrix_;
    std::vector<double> v_origin1_;
    std::vector<double> v_origin2_;
};

/// Squared triple norm parts of a density sequence with the transport field of each slab.
maxwell::TripleNorm triple_norm_vlasov(SlabSolver& solver, const std::vector<std::vector<double>>& slabs,
                                       const std::vector<FieldSamples>& fields,
                                       const std::vector<std::vector<double>>& deltas);

}  // namespace vmsd::vlasov
