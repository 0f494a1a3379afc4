#include "vmsd/space_time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vmsd/errors.hpp"

namespace vmsd::sd {

namespace {

int ipow(int base, int exp) {
    int r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

// Decompose a lexicographic index (first digit fastest) with a common radix.
void digits(int index, int radix, std::span<int> out) {
    for (auto& d : out) {
        d = index % radix;
        index /= radix;
    }
}

constexpr std::size_t kChunk = 256;

}  // namespace

void set_thread_count(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

SlabSpace::SlabSpace(mesh::TensorMesh mesh, int degree, int components)
    : mesh_(std::move(mesh)), degree_(degree), components_(components) {
    if (degree_ < 1 || degree_ > basis::kMaxDegree) {
        throw InvalidConfig("slab space: degree must be in [1, " + std::to_string(basis::kMaxDegree) + "]");
    }
    if (components_ < 1) throw InvalidConfig("slab space: component count must be >= 1");
    const int dim = mesh_.dim();
    nodes_per_dim_.resize(static_cast<std::size_t>(dim));
    spatial_nodes_ = 1;
    for (int d = 0; d < dim; ++d) {
        const int n = mesh_.cells(d) * degree_ - (mesh_.periodic(d) ? 0 : 1);
        if (n < 1) {
            throw InvalidConfig("slab space: dimension " + std::to_string(d) +
                                " has no free nodes (refine the mesh or raise the degree)");
        }
        nodes_per_dim_[static_cast<std::size_t>(d)] = n;
        spatial_nodes_ *= static_cast<std::size_t>(n);
    }
    local_spatial_ = ipow(degree_ + 1, dim);
    local_functions_ = local_spatial_ * (degree_ + 1);

    cell_nodes_.resize(mesh_.cell_count() * static_cast<std::size_t>(local_spatial_));
    std::vector<int> loc(static_cast<std::size_t>(dim));
    for (std::size_t cell = 0; cell < mesh_.cell_count(); ++cell) {
        const auto ci = mesh_.cell_index(cell);
        for (int s = 0; s < local_spatial_; ++s) {
            digits(s, degree_ + 1, loc);
            std::int64_t id = 0;
            std::int64_t stride = 1;
            bool removed = false;
            for (int d = 0; d < dim; ++d) {
                const auto du = static_cast<std::size_t>(d);
                int g = ci[du] * degree_ + loc[du];
                const int ncell_nodes = mesh_.cells(d) * degree_;
                if (mesh_.periodic(d)) {
                    g %= ncell_nodes;
                } else {
                    if (g == 0 || g == ncell_nodes) removed = true;
                    g -= 1;
                }
                id += g * stride;
                stride *= nodes_per_dim_[du];
            }
            cell_nodes_[cell * static_cast<std::size_t>(local_spatial_) + static_cast<std::size_t>(s)] =
                removed ? -1 : id;
        }
    }

    // Spatial mass matrix.
    const auto tt = make_trace_tables(*this, degree_ + 2);
    const Eigen::MatrixXd local =
        tt.value.transpose() * Eigen::Map<const Eigen::VectorXd>(tt.weight.data(), tt.points).asDiagonal() * tt.value;
    sparse::SparseSystem sys(spatial_nodes_);
    sys.reserve(mesh_.cell_count() * static_cast<std::size_t>(local_spatial_ * local_spatial_));
    for (std::size_t cell = 0; cell < mesh_.cell_count(); ++cell) {
        for (int i = 0; i < local_spatial_; ++i) {
            const auto gi = spatial_node(cell, i);
            if (gi < 0) continue;
            for (int j = 0; j < local_spatial_; ++j) {
                const auto gj = spatial_node(cell, j);
                if (gj < 0) continue;
                sys.accumulate(static_cast<std::size_t>(gi), static_cast<std::size_t>(gj), local(i, j));
            }
        }
    }
    trace_mass_ = sys.compress();
}

std::vector<int> SlabSpace::node_index(std::size_t node) const {
    std::vector<int> idx(nodes_per_dim_.size());
    for (std::size_t d = 0; d < idx.size(); ++d) {
        idx[d] = static_cast<int>(node % static_cast<std::size_t>(nodes_per_dim_[d]));
        node /= static_cast<std::size_t>(nodes_per_dim_[d]);
    }
    return idx;
}

std::size_t SlabSpace::node_id(std::span<const int> index) const {
    std::size_t id = 0;
    for (std::size_t d = nodes_per_dim_.size(); d-- > 0;) {
        id = id * static_cast<std::size_t>(nodes_per_dim_[d]) + static_cast<std::size_t>(index[d]);
    }
    return id;
}

std::vector<double> SlabSpace::node_point(std::size_t node) const {
    const auto idx = node_index(node);
    const auto ref = basis::lobatto_nodes(degree_);
    std::vector<double> x(idx.size());
    for (std::size_t d = 0; d < idx.size(); ++d) {
        const int g = idx[d] + (mesh_.periodic(static_cast<int>(d)) ? 0 : 1);
        const int cell = g / degree_;
        const int local = g % degree_;
        const double h = mesh_.cell_size(static_cast<int>(d));
        x[d] = mesh_.bounds(static_cast<int>(d)).lo + h * (cell + 0.5 * (ref[static_cast<std::size_t>(local)] + 1.0));
    }
    return x;
}

void SlabSpace::gather(std::span<const double> slab, std::size_t cell, std::span<double> local) const {
    const int p1 = degree_ + 1;
    for (int c = 0; c < components_; ++c) {
        for (int s = 0; s < local_spatial_; ++s) {
            const auto node = spatial_node(cell, s);
            for (int a = 0; a < p1; ++a) {
                const auto l = static_cast<std::size_t>(c * local_functions_ + a + p1 * s);
                local[l] = node < 0 ? 0.0 : slab[slab_dof(a, static_cast<std::size_t>(node), c)];
            }
        }
    }
}

void SlabSpace::gather_trace(std::span<const double> trace, std::size_t cell, std::span<double> local) const {
    for (int c = 0; c < components_; ++c) {
        for (int s = 0; s < local_spatial_; ++s) {
            const auto node = spatial_node(cell, s);
            local[static_cast<std::size_t>(c * local_spatial_ + s)] =
                node < 0 ? 0.0
                         : trace[static_cast<std::size_t>(node) * static_cast<std::size_t>(components_) +
                                 static_cast<std::size_t>(c)];
        }
    }
}

std::vector<double> SlabSpace::apply_trace_mass(std::span<const double> trace) const {
    if (trace.size() != trace_size()) throw AssemblyError("apply_trace_mass: trace size mismatch");
    std::vector<double> out(trace.size(), 0.0);
    const auto nc = static_cast<std::size_t>(components_);
    const auto& rp = trace_mass_.row_ptr();
    for (std::size_t r = 0; r < spatial_nodes_; ++r) {
        for (auto k = rp[r]; k < rp[r + 1]; ++k) {
            const double m = trace_mass_.values()[static_cast<std::size_t>(k)];
            const auto col = static_cast<std::size_t>(trace_mass_.col_idx()[static_cast<std::size_t>(k)]);
            for (std::size_t c = 0; c < nc; ++c) out[r * nc + c] += m * trace[col * nc + c];
        }
    }
    return out;
}

std::vector<double> SlabSpace::project_trace(
    const std::function<void(std::span<const double>, std::span<double>)>& fn) const {
    const auto tt = make_trace_tables(*this, degree_ + 3);
    const auto nc = static_cast<std::size_t>(components_);
    std::vector<std::vector<double>> rhs(nc, std::vector<double>(spatial_nodes_, 0.0));
    std::vector<double> x(static_cast<std::size_t>(dim()));
    std::vector<double> vals(nc);
    for (std::size_t cell = 0; cell < mesh_.cell_count(); ++cell) {
        const auto origin = mesh_.cell_origin(cell);
        for (int q = 0; q < tt.points; ++q) {
            for (int d = 0; d < dim(); ++d) x[static_cast<std::size_t>(d)] = origin[static_cast<std::size_t>(d)] + tt.offset_at(q, d);
            fn(x, vals);
            const double w = tt.weight[static_cast<std::size_t>(q)];
            for (int s = 0; s < local_spatial_; ++s) {
                const auto node = spatial_node(cell, s);
                if (node < 0) continue;
                const double phi = tt.value(q, s) * w;
                for (std::size_t c = 0; c < nc; ++c) rhs[c][static_cast<std::size_t>(node)] += phi * vals[c];
            }
        }
    }
    sparse::SolverOptions opts;
    opts.tolerance = 1e-13;
    std::vector<double> out(trace_size(), 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto u = sparse::solve(trace_mass_, rhs[c], opts);
        for (std::size_t s = 0; s < spatial_nodes_; ++s) out[s * nc + c] = u[s];
    }
    return out;
}

namespace {

// Reference coordinate of a physical point inside a given cell.
std::vector<double> reference_in_cell(const mesh::TensorMesh& m, std::size_t cell, std::span<const double> x) {
    const auto origin = m.cell_origin(cell);
    std::vector<double> xi(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
        xi[d] = 2.0 * (x[d] - origin[d]) / m.cell_size(static_cast<int>(d)) - 1.0;
    }
    return xi;
}

}  // namespace

std::vector<double> SlabSpace::eval_trace(std::span<const double> trace, std::span<const double> point) const {
    const std::size_t cell = mesh_.locate(point);
    const auto xi = reference_in_cell(mesh_, cell, point);
    const basis::ShapeSet shapes(degree_);
    const int p1 = degree_ + 1;
    std::vector<std::vector<double>> v(xi.size());
    for (std::size_t d = 0; d < xi.size(); ++d) v[d] = shapes.eval(xi[d]).values;
    std::vector<double> local(static_cast<std::size_t>(local_spatial_ * components_));
    gather_trace(trace, cell, local);
    std::vector<double> out(static_cast<std::size_t>(components_), 0.0);
    std::vector<int> loc(xi.size());
    for (int s = 0; s < local_spatial_; ++s) {
        digits(s, p1, loc);
        double phi = 1.0;
        for (std::size_t d = 0; d < xi.size(); ++d) phi *= v[d][static_cast<std::size_t>(loc[d])];
        for (int c = 0; c < components_; ++c) out[static_cast<std::size_t>(c)] += phi * local[static_cast<std::size_t>(c * local_spatial_ + s)];
    }
    return out;
}

std::vector<double> SlabSpace::eval_slab(std::span<const double> slab, double tau, std::span<const double> point) const {
    const basis::ShapeSet shapes(degree_);
    const auto tv = shapes.eval(tau).values;
    std::vector<double> out(static_cast<std::size_t>(components_), 0.0);
    for (int a = 0; a <= degree_; ++a) {
        const auto block = slab.subspan(static_cast<std::size_t>(a) * trace_size(), trace_size());
        const auto v = eval_trace(block, point);
        for (int c = 0; c < components_; ++c) out[static_cast<std::size_t>(c)] += tv[static_cast<std::size_t>(a)] * v[static_cast<std::size_t>(c)];
    }
    return out;
}

namespace {

CellTables tensor_tables(int degree, std::span<const double> lengths, int points_per_dir) {
    const basis::ShapeSet shapes(degree);
    const auto rule = basis::gauss_rule(points_per_dir);
    const auto tab = basis::tabulate(shapes, rule);
    const int dims = static_cast<int>(lengths.size());
    const int p1 = degree + 1;
    CellTables t;
    t.points_per_dir = points_per_dir;
    t.dims = dims;
    t.points = ipow(points_per_dir, dims);
    t.functions = ipow(p1, dims);
    t.weight.assign(static_cast<std::size_t>(t.points), 1.0);
    t.offset.assign(static_cast<std::size_t>(t.points * dims), 0.0);
    t.value.setOnes(t.points, t.functions);
    t.grad.assign(static_cast<std::size_t>(dims), Eigen::MatrixXd::Ones(t.points, t.functions));
    std::vector<int> qi(static_cast<std::size_t>(dims));
    std::vector<int> ai(static_cast<std::size_t>(dims));
    for (int q = 0; q < t.points; ++q) {
        digits(q, points_per_dir, qi);
        for (int d = 0; d < dims; ++d) {
            const auto du = static_cast<std::size_t>(d);
            const auto qd = static_cast<std::size_t>(qi[du]);
            t.weight[static_cast<std::size_t>(q)] *= rule.weights[qd] * 0.5 * lengths[du];
            t.offset[static_cast<std::size_t>(q * dims + d)] = 0.5 * (rule.nodes[qd] + 1.0) * lengths[du];
        }
        for (int l = 0; l < t.functions; ++l) {
            digits(l, p1, ai);
            for (int d = 0; d < dims; ++d) {
                const auto du = static_cast<std::size_t>(d);
                const double v = tab.value(qi[du], ai[du]);
                const double dv = tab.derivative(qi[du], ai[du]) * 2.0 / lengths[du];
                t.value(q, l) *= v;
                for (int g = 0; g < dims; ++g) t.grad[static_cast<std::size_t>(g)](q, l) *= (g == d ? dv : v);
            }
        }
    }
    return t;
}

}  // namespace

CellTables make_cell_tables(const SlabSpace& space, double slab_length, int points_per_dir) {
    std::vector<double> lengths{slab_length};
    for (int d = 0; d < space.dim(); ++d) lengths.push_back(space.mesh().cell_size(d));
    return tensor_tables(space.degree(), lengths, points_per_dir);
}

CellTables make_trace_tables(const SlabSpace& space, int points_per_dir) {
    std::vector<double> lengths;
    for (int d = 0; d < space.dim(); ++d) lengths.push_back(space.mesh().cell_size(d));
    return tensor_tables(space.degree(), lengths, points_per_dir);
}

StreamingAssembler::StreamingAssembler(const SlabSpace& space, double slab_length)
    : space_(&space), slab_length_(slab_length),
      tables_(make_cell_tables(space, slab_length, space.degree() + 2)) {
    if (!(slab_length > 0.0)) throw InvalidConfig("streaming assembler: slab length must be positive");
    const int nc = space.components();
    const int nq = tables_.points;
    const int nl = tables_.functions;
    phi_e_.setZero(nq * nc, nl * nc);
    for (int c = 0; c < nc; ++c) {
        for (int q = 0; q < nq; ++q) {
            for (int j = 0; j < nl; ++j) phi_e_(q * nc + c, c * nl + j) = tables_.value(q, j);
        }
    }
    const auto tt = make_trace_tables(space, space.degree() + 2);
    trace_local_ = tt.value.transpose() *
                   Eigen::Map<const Eigen::VectorXd>(tt.weight.data(), tt.points).asDiagonal() * tt.value;
}

void StreamingAssembler::streaming_matrix(std::span<const double> coeffs, Eigen::MatrixXd& s) const {
    const int nc = space_->components();
    const int dim = space_->dim();
    const int nq = tables_.points;
    const int nl = tables_.functions;
    s.setZero(nq * nc, nl * nc);
    const auto& gt = tables_.grad[0];
    for (int c = 0; c < nc; ++c) {
        for (int q = 0; q < nq; ++q) {
            for (int r = 0; r < nc; ++r) {
                const int srow = q * nc + r;
                for (int l = 0; l < dim; ++l) {
                    const double a = coeffs[static_cast<std::size_t>(((q * dim + l) * nc + r) * nc + c)];
                    if (a == 0.0) continue;
                    const auto& gl = tables_.grad[static_cast<std::size_t>(l + 1)];
                    for (int j = 0; j < nl; ++j) s(srow, c * nl + j) += a * gl(q, j);
                }
                if (r == c) {
                    for (int j = 0; j < nl; ++j) s(srow, c * nl + j) += gt(q, j);
                }
            }
        }
    }
}

void StreamingAssembler::build_pattern() {
    const auto& sp = *space_;
    const int nc = sp.components();
    const int p1 = sp.degree() + 1;
    const int nl = tables_.functions;
    const int nloc = nl * nc;
    const std::size_t cells = sp.mesh().cell_count();

    // Global dof of each local (function, component) of a cell, -1 if removed.
    auto local_dofs = [&](std::size_t cell, std::vector<std::int64_t>& dofs) {
        for (int c = 0; c < nc; ++c) {
            for (int l = 0; l < nl; ++l) {
                const int a = l % p1;
                const int s = l / p1;
                const auto node = sp.spatial_node(cell, s);
                dofs[static_cast<std::size_t>(c * nl + l)] =
                    node < 0 ? -1 : static_cast<std::int64_t>(sp.slab_dof(a, static_cast<std::size_t>(node), c));
            }
        }
    };

    sparse::SparseSystem sys(sp.slab_size());
    sys.reserve(cells * static_cast<std::size_t>(nloc * nloc));
    std::vector<std::int64_t> dofs(static_cast<std::size_t>(nloc));
    for (std::size_t cell = 0; cell < cells; ++cell) {
        local_dofs(cell, dofs);
        for (int i = 0; i < nloc; ++i) {
            if (dofs[static_cast<std::size_t>(i)] < 0) continue;
            for (int j = 0; j < nloc; ++j) {
                if (dofs[static_cast<std::size_t>(j)] < 0) continue;
                sys.accumulate(static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)]),
                               static_cast<std::size_t>(dofs[static_cast<std::size_t>(j)]), 0.0);
            }
        }
    }
    pattern_ = sys.compress();
    if (pattern_.nonzeros() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        throw AssemblyError("streaming assembler: pattern too large for 32-bit offsets");
    }
    offsets_.assign(cells * static_cast<std::size_t>(nloc * nloc), -1);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        local_dofs(cell, dofs);
        auto* off = offsets_.data() + cell * static_cast<std::size_t>(nloc * nloc);
        for (int i = 0; i < nloc; ++i) {
            if (dofs[static_cast<std::size_t>(i)] < 0) continue;
            for (int j = 0; j < nloc; ++j) {
                if (dofs[static_cast<std::size_t>(j)] < 0) continue;
                off[i * nloc + j] = static_cast<std::int32_t>(
                    pattern_.offset(static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)]),
                                    static_cast<std::size_t>(dofs[static_cast<std::size_t>(j)])));
            }
        }
    }
    have_pattern_ = true;
}

void StreamingAssembler::assemble_matrix(std::span<const double> delta, const CoefficientFill& coefficients,
                                         bool constant, sparse::CsrMatrix& matrix) {
    const auto& sp = *space_;
    const std::size_t cells = sp.mesh().cell_count();
    if (delta.size() != cells) throw AssemblyError("streaming assembler: delta size must equal the cell count");
    if (!have_pattern_) build_pattern();

    const int nc = sp.components();
    const int dim = sp.dim();
    const int nq = tables_.points;
    const int nl = tables_.functions;
    const int nloc = nl * nc;
    const int p1 = sp.degree() + 1;
    const int nls = sp.local_spatial_functions();
    const std::size_t coeff_size = static_cast<std::size_t>(nq * dim * nc * nc);

    Eigen::VectorXd w(nq * nc);
    for (int q = 0; q < nq; ++q) {
        for (int r = 0; r < nc; ++r) w(q * nc + r) = tables_.weight[static_cast<std::size_t>(q)];
    }

    // Lower-face trace term <u_+, v_+>: same local block for every cell.
    Eigen::MatrixXd trace_block = Eigen::MatrixXd::Zero(nloc, nloc);
    for (int c = 0; c < nc; ++c) {
        for (int si = 0; si < nls; ++si) {
            for (int sj = 0; sj < nls; ++sj) {
                trace_block(c * nl + si * p1, c * nl + sj * p1) = trace_local_(si, sj);
            }
        }
    }

    matrix = pattern_;
    auto& values = matrix.values();
    std::fill(values.begin(), values.end(), 0.0);

    Eigen::MatrixXd galerkin_const;
    Eigen::MatrixXd sd_const;
    if (constant) {
        std::vector<double> coeffs(coeff_size);
        coefficients(0, coeffs);
        Eigen::MatrixXd s;
        streaming_matrix(coeffs, s);
        const Eigen::MatrixXd ws = w.asDiagonal() * s;
        galerkin_const = phi_e_.transpose() * ws + trace_block;
        sd_const = s.transpose() * ws;
    }

    std::vector<double> chunk(kChunk * static_cast<std::size_t>(nloc * nloc));
    for (std::size_t begin = 0; begin < cells; begin += kChunk) {
        const std::size_t end = std::min(cells, begin + kChunk);
        const auto count = static_cast<std::int64_t>(end - begin);
#pragma omp parallel if (!constant && count > 8)
        {
            std::vector<double> coeffs(coeff_size);
            Eigen::MatrixXd s;
            Eigen::MatrixXd ws;
            Eigen::MatrixXd local(nloc, nloc);
#pragma omp for schedule(static)
            for (std::int64_t k = 0; k < count; ++k) {
                const std::size_t cell = begin + static_cast<std::size_t>(k);
                const double dk = delta[cell];
                Eigen::Map<Eigen::MatrixXd> out(chunk.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(nloc * nloc),
                                                nloc, nloc);
                if (constant) {
                    out = galerkin_const + dk * sd_const;
                } else {
                    coefficients(cell, coeffs);
                    streaming_matrix(coeffs, s);
                    ws = w.asDiagonal() * s;
                    // A_loc(i, j) = (L phi_j, phi_i + delta L phi_i)
                    local.noalias() = (phi_e_ + dk * s).transpose() * ws;
                    out = local + trace_block;
                }
            }
        }
        for (std::size_t cell = begin; cell < end; ++cell) {
            const double* loc = chunk.data() + (cell - begin) * static_cast<std::size_t>(nloc * nloc);
            const auto* off = offsets_.data() + cell * static_cast<std::size_t>(nloc * nloc);
            // loc is column-major: loc[j * nloc + i] = A(i, j); offsets are row-major (i, j).
            for (int j = 0; j < nloc; ++j) {
                for (int i = 0; i < nloc; ++i) {
                    const auto o = off[i * nloc + j];
                    if (o >= 0) values[static_cast<std::size_t>(o)] += loc[j * nloc + i];
                }
            }
        }
    }
}

void StreamingAssembler::add_source(std::span<const double> delta, const CoefficientFill& coefficients,
                                    bool constant, const SourceFill& source, std::span<double> rhs) const {
    const auto& sp = *space_;
    const std::size_t cells = sp.mesh().cell_count();
    if (rhs.size() != sp.slab_size()) throw AssemblyError("streaming assembler: rhs size mismatch");
    if (delta.size() != cells) throw AssemblyError("streaming assembler: delta size must equal the cell count");
    const int nc = sp.components();
    const int dim = sp.dim();
    const int nq = tables_.points;
    const int nl = tables_.functions;
    const int p1 = sp.degree() + 1;
    std::vector<double> coeffs(static_cast<std::size_t>(nq * dim * nc * nc));
    std::vector<double> b(static_cast<std::size_t>(nq * nc));
    Eigen::MatrixXd s;
    if (constant) {
        coefficients(0, coeffs);
        streaming_matrix(coeffs, s);
    }
    for (std::size_t cell = 0; cell < cells; ++cell) {
        source(cell, b);
        Eigen::VectorXd wb(nq * nc);
        bool nonzero = false;
        for (int q = 0; q < nq; ++q) {
            for (int r = 0; r < nc; ++r) {
                const double v = b[static_cast<std::size_t>(q * nc + r)];
                nonzero = nonzero || v != 0.0;
                wb(q * nc + r) = tables_.weight[static_cast<std::size_t>(q)] * v;
            }
        }
        if (!nonzero) continue;
        if (!constant) {
            coefficients(cell, coeffs);
            streaming_matrix(coeffs, s);
        }
        const Eigen::VectorXd loc = (phi_e_ + delta[cell] * s).transpose() * wb;
        for (int c = 0; c < nc; ++c) {
            for (int l = 0; l < nl; ++l) {
                const auto node = sp.spatial_node(cell, l / p1);
                if (node < 0) continue;
                rhs[sp.slab_dof(l % p1, static_cast<std::size_t>(node), c)] += loc(c * nl + l);
            }
        }
    }
}

void StreamingAssembler::add_incoming(std::span<const double> incoming, std::span<double> rhs) const {
    const auto& sp = *space_;
    if (incoming.size() != sp.trace_size() || rhs.size() != sp.slab_size()) {
        throw AssemblyError("streaming assembler: incoming trace size mismatch");
    }
    const auto m = sp.apply_trace_mass(incoming);
    for (std::size_t i = 0; i < m.size(); ++i) rhs[i] += m[i];
}

double weighted_streaming_residual(const SlabSpace& space, const CellTables& tables, std::span<const double> slab,
                                   std::span<const double> delta, const CoefficientFill& coefficients,
                                   bool constant) {
    const int nc = space.components();
    const int dim = space.dim();
    const int nq = tables.points;
    const int nl = tables.functions;
    std::vector<double> coeffs(static_cast<std::size_t>(nq * dim * nc * nc));
    if (constant) coefficients(0, coeffs);
    std::vector<double> local(static_cast<std::size_t>(nl * nc));
    // Derivatives of each component at each point: du[c][d](q)
    std::vector<Eigen::VectorXd> du(static_cast<std::size_t>(nc * (dim + 1)));
    double total = 0.0;
    for (std::size_t cell = 0; cell < space.mesh().cell_count(); ++cell) {
        if (delta[cell] == 0.0) continue;
        space.gather(slab, cell, local);
        if (!constant) coefficients(cell, coeffs);
        for (int c = 0; c < nc; ++c) {
            const Eigen::Map<const Eigen::VectorXd> uc(local.data() + c * nl, nl);
            for (int d = 0; d <= dim; ++d) du[static_cast<std::size_t>(c * (dim + 1) + d)] = tables.grad[static_cast<std::size_t>(d)] * uc;
        }
        double cell_sum = 0.0;
        for (int q = 0; q < nq; ++q) {
            double sq = 0.0;
            for (int r = 0; r < nc; ++r) {
                double lu = du[static_cast<std::size_t>(r * (dim + 1))](q);
                for (int l = 0; l < dim; ++l) {
                    for (int c = 0; c < nc; ++c) {
                        lu += coeffs[static_cast<std::size_t>(((q * dim + l) * nc + r) * nc + c)] *
                              du[static_cast<std::size_t>(c * (dim + 1) + l + 1)](q);
                    }
                }
                sq += lu * lu;
            }
            cell_sum += tables.weight[static_cast<std::size_t>(q)] * sq;
        }
        total += delta[cell] * cell_sum;
    }
    return total;
}

double trace_norm2(const SlabSpace& space, std::span<const double> trace) {
    const auto tt = make_trace_tables(space, space.degree() + 2);
    const int nc = space.components();
    const int nls = space.local_spatial_functions();
    std::vector<double> local(static_cast<std::size_t>(nls * nc));
    double total = 0.0;
    for (std::size_t cell = 0; cell < space.mesh().cell_count(); ++cell) {
        space.gather_trace(trace, cell, local);
        for (int c = 0; c < nc; ++c) {
            const Eigen::Map<const Eigen::VectorXd> uc(local.data() + c * nls, nls);
            const Eigen::VectorXd v = tt.value * uc;
            for (int q = 0; q < tt.points; ++q) total += tt.weight[static_cast<std::size_t>(q)] * v(q) * v(q);
        }
    }
    return total;
}

double slab_l2_error2(const SlabSpace& space, const CellTables& tables, std::span<const double> slab, double t0,
                      const std::function<void(double, std::span<const double>, std::span<double>)>& exact) {
    const int nc = space.components();
    const int nl = tables.functions;
    const int dim = space.dim();
    std::vector<double> local(static_cast<std::size_t>(nl * nc));
    std::vector<double> x(static_cast<std::size_t>(dim));
    std::vector<double> ref(static_cast<std::size_t>(nc));
    double total = 0.0;
    for (std::size_t cell = 0; cell < space.mesh().cell_count(); ++cell) {
        space.gather(slab, cell, local);
        const auto origin = space.mesh().cell_origin(cell);
        const Eigen::Map<const Eigen::MatrixXd> coeffs(local.data(), nl, nc);
        const Eigen::MatrixXd vals = tables.value * coeffs;
        for (int q = 0; q < tables.points; ++q) {
            for (int d = 0; d < dim; ++d) {
                x[static_cast<std::size_t>(d)] = origin[static_cast<std::size_t>(d)] + tables.offset_at(q, d + 1);
            }
            exact(t0 + tables.offset_at(q, 0), x, ref);
            double sq = 0.0;
            for (int c = 0; c < nc; ++c) {
                const double e = vals(q, c) - ref[static_cast<std::size_t>(c)];
                sq += e * e;
            }
            total += tables.weight[static_cast<std::size_t>(q)] * sq;
        }
    }
    return total;
}

double global_form(const SlabSpace& space, const std::vector<const sparse::CsrMatrix*>& matrices,
                   const std::vector<std::vector<double>>& slabs) {
    if (matrices.size() != slabs.size()) throw AssemblyError("global_form: one matrix per slab required");
    double total = 0.0;
    for (std::size_t m = 0; m < slabs.size(); ++m) {
        total += matrices[m]->quadratic_form(slabs[m], slabs[m]);
        if (m == 0) continue;
        const auto prev = space.apply_trace_mass(space.minus_trace(slabs[m - 1]));
        const auto plus = space.plus_trace(slabs[m]);
        for (std::size_t i = 0; i < prev.size(); ++i) total -= prev[i] * plus[i];
    }
    return total;
}

}  // namespace vmsd::sd
