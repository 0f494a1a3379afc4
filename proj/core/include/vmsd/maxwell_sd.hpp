#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "vmsd/space_time.hpp"
#include "vmsd/sparse.hpp"

namespace vmsd::maxwell {

enum class FieldMode { full3d, reduced1half };

/// Constant symmetric matrices M_l of  dW/dt + sum_l M_l dW/dx_l = b.
struct FluxMatrices {
    int dim = 0;
    int components = 0;
    std::vector<Eigen::MatrixXd> m;
};

/// full3d: W = (E1, E2, E3, B1, B2, B3) on R^3.
/// reduced1half: W = (E1, E2, B) on one spatial coordinate.
/// scale multiplies every matrix (dx_tilde = dx / L for a normalized coordinate).
FluxMatrices flux_matrices(FieldMode mode, double scale = 1.0);

/// sum_l M_l g_l with gradient laid out grad[l * nc + c].
std::vector<double> apply_flux(const FluxMatrices& flux, std::span<const double> grad);

/// Coefficient fill repeating the constant M_l at every quadrature point.
sd::CoefficientFill constant_coefficients(const FluxMatrices& flux, int points);

/// b(t, x) evaluated pointwise.
using PointSource = std::function<void(double t, std::span<const double> x, std::span<double> b)>;

/// Samples a pointwise source at the quadrature points of each cell of a slab starting at t0.
sd::SourceFill pointwise_source(const sd::SlabSpace& space, const sd::CellTables& tables, double t0,
                                PointSource source);

/// Source b = -(j, 0) from a current given as a slab vector of the field space
/// (components j1, j2, ... with the magnetic components zero).
sd::SourceFill current_source(const sd::SlabSpace& space, const sd::CellTables& tables,
                              std::span<const double> current);

/// Slab solution with its traces at both slab ends.
struct FieldState {
    int slab = 0;
    std::vector<double> coefficients;
    std::vector<double> incoming;  // W_- at t_m
    std::vector<double> outgoing;  // W_- at t_{m+1}
};

/// Assembles and solves one slab at a time. On a uniform slab partition with
/// a fixed delta the matrix is the same for every slab, so it is assembled and
/// factorized once and only the right-hand side changes.
class SlabSolver {
public:
    SlabSolver(const sd::SlabSpace& space, double slab_length, FluxMatrices flux,
               sparse::SolverOptions options = {});
    ~SlabSolver();
    SlabSolver(SlabSolver&&) noexcept;

    const sd::SlabSpace& space() const { return *space_; }
    const FluxMatrices& flux() const { return flux_; }
    const sd::CellTables& tables() const { return assembler_.tables(); }

    /// Matrix for a per-cell delta; reassembled only if delta changed.
    const sparse::CsrMatrix& matrix(std::span<const double> delta);

    std::vector<double> rhs(std::span<const double> delta, std::span<const double> incoming,
                            const sd::SourceFill* source) const;

    FieldState solve(int slab, std::span<const double> delta, std::span<const double> incoming,
                     const sd::SourceFill* source = nullptr);

private:
    const sd::SlabSpace* space_;
    FluxMatrices flux_;
    sparse::SolverOptions options_;
    sd::StreamingAssembler assembler_;
    sd::CoefficientFill coefficients_;
    sparse::CsrMatrix matrix_;
    std::vector<double> delta_;
    std::unique_ptr<sparse::Factorization> lu_;
};

/// Parts of the squared triple norm
///   1/2 (|g_+|_0^2 + |g_-|_M^2 + sum_m |[g]|_m^2) + sum_K delta_K |dg/dt + sum_l M_l dg/dx_l|_K^2
/// evaluated by quadrature.
struct TripleNorm {
    double initial = 0.0;
    double final = 0.0;
    double jumps = 0.0;
    double streaming = 0.0;

    double squared() const { return 0.5 * (initial + final + jumps) + streaming; }
};

/// deltas[m] holds the per-cell delta of slab m.
TripleNorm triple_norm_maxwell(const sd::SlabSpace& space, const FluxMatrices& flux, double slab_length,
                               const std::vector<std::vector<double>>& slabs,
                               const std::vector<std::vector<double>>& deltas);

}  // namespace vmsd::maxwell
