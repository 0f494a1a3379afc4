#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "vmsd/basis.hpp"
#include "vmsd/mesh.hpp"
#include "vmsd/sparse.hpp"

namespace vmsd::sd {

/// Continuous tensor-product Lagrange space of degree p on a box mesh,
/// tensorized with degree-p polynomials in time on one slab.
///
/// Spatial nodes: a periodic dimension with N cells carries N*p nodes, a
/// non-periodic one carries N*p - 1 interior nodes (zero trace is imposed by
/// dropping the boundary nodes). Slab unknowns are ordered
/// (time node a, spatial node s, component c) -> (a * S + s) * nc + c, so the
/// blocks a = 0 and a = p are the traces at the slab ends.
class SlabSpace {
public:
    SlabSpace(mesh::TensorMesh mesh, int degree, int components);

    const mesh::TensorMesh& mesh() const { return mesh_; }
    int dim() const { return mesh_.dim(); }
    int degree() const { return degree_; }
    int components() const { return components_; }

    std::size_t spatial_nodes() const { return spatial_nodes_; }
    std::size_t trace_size() const { return spatial_nodes_ * static_cast<std::size_t>(components_); }
    std::size_t slab_size() const { return trace_size() * static_cast<std::size_t>(degree_ + 1); }
    int nodes_in_dim(int d) const { return nodes_per_dim_[static_cast<std::size_t>(d)]; }

    /// Scalar local functions per space-time cell: (p+1)^(dim+1), time index fastest.
    int local_functions() const { return local_functions_; }
    int local_spatial_functions() const { return local_spatial_; }

    /// Free spatial node of a cell's local spatial function, or -1 for a removed boundary node.
    std::int64_t spatial_node(std::size_t cell, int local_spatial) const {
        return cell_nodes_[cell * static_cast<std::size_t>(local_spatial_) + static_cast<std::size_t>(local_spatial)];
    }

    std::size_t slab_dof(int time_node, std::size_t node, int component) const {
        return (static_cast<std::size_t>(time_node) * spatial_nodes_ + node) * static_cast<std::size_t>(components_) +
               static_cast<std::size_t>(component);
    }

    /// Physical coordinates of a free spatial node.
    std::vector<double> node_point(std::size_t node) const;
    std::vector<int> node_index(std::size_t node) const;
    std::size_t node_id(std::span<const int> index) const;

    /// Gather the local coefficient block (local function fastest, then component)
    /// of one cell from a slab vector; removed nodes contribute 0.
    void gather(std::span<const double> slab, std::size_t cell, std::span<double> local) const;
    /// Same for a trace vector with the spatial local functions only.
    void gather_trace(std::span<const double> trace, std::size_t cell, std::span<double> local) const;

    std::span<const double> plus_trace(std::span<const double> slab) const {
        return slab.subspan(0, trace_size());
    }
    std::span<const double> minus_trace(std::span<const double> slab) const {
        return slab.subspan(static_cast<std::size_t>(degree_) * trace_size(), trace_size());
    }

    /// Scalar spatial mass matrix (S x S) of the trace space.
    const sparse::CsrMatrix& trace_mass() const { return trace_mass_; }
    /// Trace mass applied component-wise: out = (M_s (x) I) trace.
    std::vector<double> apply_trace_mass(std::span<const double> trace) const;
    /// L2 projection of a pointwise function (components values per point) onto the trace space.
    std::vector<double> project_trace(
        const std::function<void(std::span<const double> x, std::span<double> values)>& fn) const;

    /// Value of a trace vector at a physical point.
    std::vector<double> eval_trace(std::span<const double> trace, std::span<const double> point) const;
    /// Value of a slab vector at (reference time tau in [-1,1], physical point).
    std::vector<double> eval_slab(std::span<const double> slab, double tau, std::span<const double> point) const;

private:
    mesh::TensorMesh mesh_;
    int degree_;
    int components_;
    std::vector<int> nodes_per_dim_;
    std::size_t spatial_nodes_ = 0;
    int local_functions_ = 0;
    int local_spatial_ = 0;
    std::vector<std::int64_t> cell_nodes_;
    sparse::CsrMatrix trace_mass_;
};

/// Basis values and physical derivatives of one space-time cell at a tensor
/// Gauss rule. Direction 0 is time, directions 1..dim are spatial. All cells of
/// a uniform mesh share these tables.
struct CellTables {
    int points_per_dir = 0;
    int dims = 0;  // 1 + spatial dim
    int points = 0;
    int functions = 0;
    std::vector<double> weight;  // physical weights, size points
    std::vector<double> offset;  // physical offset from (t_m, cell origin), points x dims
    Eigen::MatrixXd value;       // points x functions
    std::vector<Eigen::MatrixXd> grad;  // dims matrices of points x functions

    double offset_at(int q, int d) const {
        return offset[static_cast<std::size_t>(q * dims + d)];
    }
};

CellTables make_cell_tables(const SlabSpace& space, double slab_length, int points_per_dir);

/// Same for the spatial trace (no time direction): dims = spatial dim.
CellTables make_trace_tables(const SlabSpace& space, int points_per_dir);

/// Fills the streaming coefficient matrices A_l (l over spatial dims, each nc x nc,
/// row-major) at every quadrature point of a cell: out[(q * dim + l) * nc * nc + r * nc + c].
using CoefficientFill = std::function<void(std::size_t cell, std::span<double> out)>;
/// Fills the source vector b at every quadrature point of a cell: out[q * nc + r].
using SourceFill = std::function<void(std::size_t cell, std::span<double> out)>;

struct SlabSystem {
    sparse::CsrMatrix matrix;
    std::vector<double> rhs;
};

/// Streamline-diffusion space-time assembler for  du/dt + sum_l A_l du/dx_l = b
/// on one slab:
///   sum_K (L u, v + delta_K L v)_K + <u_+, v_+>_m = sum_K (b, v + delta_K L v)_K + <u_-, v_+>_m.
/// The sparsity pattern and the local-to-global offsets are built once and
/// reused by every later assembly.
class StreamingAssembler {
public:
    StreamingAssembler(const SlabSpace& space, double slab_length);

    const SlabSpace& space() const { return *space_; }
    const CellTables& tables() const { return tables_; }
    double slab_length() const { return slab_length_; }

    /// Assemble the slab matrix. When constant is true the coefficient fill is
    /// called once and reused for every cell.
    void assemble_matrix(std::span<const double> delta, const CoefficientFill& coefficients, bool constant,
                         sparse::CsrMatrix& matrix);

    /// Accumulate the source part of the rhs (b, v + delta_K L v).
    void add_source(std::span<const double> delta, const CoefficientFill& coefficients, bool constant,
                    const SourceFill& source, std::span<double> rhs) const;

    /// Accumulate the incoming trace term <u_-, v_+>_m.
    void add_incoming(std::span<const double> incoming, std::span<double> rhs) const;

private:
    void build_pattern();
    void streaming_matrix(std::span<const double> coeffs, Eigen::MatrixXd& s) const;

    const SlabSpace* space_;
    double slab_length_;
    CellTables tables_;
    Eigen::MatrixXd phi_e_;         // (points*nc) x (functions*nc): phi_i e_c
    Eigen::MatrixXd trace_local_;   // local spatial mass at the lower time face
    sparse::CsrMatrix pattern_;
    std::vector<std::int32_t> offsets_;  // cells x (nloc*nc)^2, -1 for removed nodes
    bool have_pattern_ = false;
};

/// Squared L2 norm over one slab of L u = du/dt + sum_l A_l du/dx_l, weighted per cell by delta.
double weighted_streaming_residual(const SlabSpace& space, const CellTables& tables,
                                   std::span<const double> slab, std::span<const double> delta,
                                   const CoefficientFill& coefficients, bool constant);

/// Squared L2 norm of a trace vector by direct quadrature.
double trace_norm2(const SlabSpace& space, std::span<const double> trace);

/// Squared L2(slab) distance between a slab vector and a pointwise function
/// of (t, x) with components values; t0 is the slab start time.
double slab_l2_error2(const SlabSpace& space, const CellTables& tables, std::span<const double> slab, double t0,
                      const std::function<void(double t, std::span<const double> x, std::span<double> values)>& exact);

/// Global form sum_m g_m^T A_m g_m - sum_{m>=1} <g_{m-1,-}, g_{m,+}> for a
/// sequence of slab vectors, i.e. the full discontinuous-in-time bilinear
/// form evaluated on its diagonal.
double global_form(const SlabSpace& space, const std::vector<const sparse::CsrMatrix*>& matrices,
                   const std::vector<std::vector<double>>& slabs);

/// Dense local matrices are computed chunk by chunk; this sets the OpenMP
/// thread count used inside (<= 0 leaves the runtime default).
void set_thread_count(int threads);
int thread_count();

}  // namespace vmsd::sd
