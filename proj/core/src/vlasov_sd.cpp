#include "vmsd/vlasov_sd.hpp"

#include <cmath>

#include "vmsd/errors.hpp"

namespace vmsd::vlasov {

std::vector<double> vhat(std::span<const double> v, bool relativistic) {
    std::vector<double> out(v.begin(), v.end());
    if (!relativistic) return out;
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    const double s = 1.0 / std::sqrt(1.0 + n2);
    for (auto& x : out) x *= s;
    return out;
}

std::vector<double> vhat_jacobian(std::span<const double> v, bool relativistic) {
    const std::size_t n = v.size();
    std::vector<double> j(n * n, 0.0);
    if (!relativistic) {
        for (std::size_t i = 0; i < n; ++i) j[i * n + i] = 1.0;
        return j;
    }
    double g2 = 1.0;
    for (double x : v) g2 += x * x;
    const double s = 1.0 / (g2 * std::sqrt(g2));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            // v_a v_b and v_b v_a round identically, so j is exactly symmetric.
            j[a * n + b] = ((a == b ? g2 : 0.0) - v[a] * v[b]) * s;
        }
    }
    return j;
}

std::vector<double> transport_eval(const TransportField& g, double t, std::span<const double> x,
                                   std::span<const double> v) {
    if (!g.field) throw DomainError("transport_eval: no field evaluator");
    const FieldPoint f = g.field(t, x);
    const auto w = vhat(v, g.relativistic);
    if (g.mode == maxwell::FieldMode::reduced1half) {
        if (v.size() != 2) throw DomainError("transport_eval: reduced mode needs two velocity components");
        return {w[0] * g.x_scale, f.e[0] + w[1] * f.b[2], f.e[1] - w[0] * f.b[2]};
    }
    if (v.size() != 3) throw DomainError("transport_eval: full mode needs three velocity components");
    return {w[0] * g.x_scale,
            w[1] * g.x_scale,
            w[2] * g.x_scale,
            f.e[0] + w[1] * f.b[2] - w[2] * f.b[1],
            f.e[1] + w[2] * f.b[0] - w[0] * f.b[2],
            f.e[2] + w[0] * f.b[1] - w[1] * f.b[0]};
}

double transport_divergence(maxwell::FieldMode mode, bool relativistic, std::span<const double> v,
                            const FieldPoint& field) {
    const auto j = vhat_jacobian(v, relativistic);
    const std::size_t n = v.size();
    // d/dx of vhat and d/dv of E vanish identically; what is left is
    // sum_i d/dv_i (vhat x B)_i = sum_k B_k sum_{i<j} eps_ijk (J_ji - J_ij).
    if (mode == maxwell::FieldMode::reduced1half) {
        if (n != 2) throw DomainError("transport_divergence: reduced mode needs two velocity components");
        // (vhat x B)_1 = vhat_2 B, (vhat x B)_2 = -vhat_1 B
        return field.b[2] * (j[1 * n + 0] - j[0 * n + 1]);
    }
    if (n != 3) throw DomainError("transport_divergence: full mode needs three velocity components");
    const double d01 = j[1 * n + 0] - j[0 * n + 1];
    const double d12 = j[2 * n + 1] - j[1 * n + 2];
    const double d20 = j[0 * n + 2] - j[2 * n + 0];
    return field.b[2] * d01 + field.b[0] * d12 + field.b[1] * d20;
}

PhaseGrid::PhaseGrid(mesh::Interval x, int x_cells, mesh::Interval v1, mesh::Interval v2, int v_cells1,
                     int v_cells2, int degree, bool relativistic)
    : x_mesh_({x}, {x_cells}, {true}),
      phase_(mesh::TensorMesh({x, v1, v2}, {x_cells, v_cells1, v_cells2}, {true, false, false}), degree, 1),
      velocity_(mesh::TensorMesh({v1, v2}, {v_cells1, v_cells2}, {false, false}), degree, 1),
      relativistic_(relativistic) {
    x_nodes_ = static_cast<std::size_t>(phase_.nodes_in_dim(0));
    const std::size_t nv = velocity_.spatial_nodes();
    mass_w_.assign(nv, 0.0);
    for (auto& w : current_w_) w.assign(nv, 0.0);
    for (auto& w : kinetic_w_) w.assign(nv, 0.0);

    const auto vt = sd::make_trace_tables(velocity_, degree + 3);
    const auto& vm = velocity_.mesh();
    std::vector<double> v(2);
    for (std::size_t cell = 0; cell < vm.cell_count(); ++cell) {
        const auto origin = vm.cell_origin(cell);
        for (int q = 0; q < vt.points; ++q) {
            v[0] = origin[0] + vt.offset_at(q, 0);
            v[1] = origin[1] + vt.offset_at(q, 1);
            const auto w = vhat(v, relativistic_);
            const double wq = vt.weight[static_cast<std::size_t>(q)];
            for (int s = 0; s < velocity_.local_spatial_functions(); ++s) {
                const auto n = velocity_.spatial_node(cell, s);
                if (n < 0) continue;
                const double phi = vt.value(q, s) * wq;
                const auto nn = static_cast<std::size_t>(n);
                mass_w_[nn] += phi;
                for (std::size_t i = 0; i < 2; ++i) {
                    current_w_[i][nn] += phi * w[i];
                    kinetic_w_[i][nn] += phi * v[i] * v[i];
                }
            }
        }
    }

    const sd::SlabSpace xs(x_mesh_, degree, 1);
    const auto xt = sd::make_trace_tables(xs, degree + 2);
    x_w_.assign(xs.spatial_nodes(), 0.0);
    for (std::size_t cell = 0; cell < x_mesh_.cell_count(); ++cell) {
        for (int q = 0; q < xt.points; ++q) {
            for (int s = 0; s < xs.local_spatial_functions(); ++s) {
                const auto n = xs.spatial_node(cell, s);
                if (n >= 0) x_w_[static_cast<std::size_t>(n)] += xt.value(q, s) * xt.weight[static_cast<std::size_t>(q)];
            }
        }
    }
}

std::vector<double> PhaseGrid::reflect_velocity(std::span<const double> trace) const {
    const auto& vm = velocity_.mesh();
    for (int d = 0; d < 2; ++d) {
        const auto& b = vm.bounds(d);
        if (std::abs(b.lo + b.hi) > 1e-12 * b.length()) {
            throw InvalidConfig("velocity reflection needs a box symmetric about v = 0");
        }
    }
    if (trace.size() != phase_.trace_size()) throw AssemblyError("reflect_velocity: trace size mismatch");
    const int n1 = velocity_.nodes_in_dim(0);
    const int n2 = velocity_.nodes_in_dim(1);
    std::vector<double> out(trace.size());
    for (int b = 0; b < n2; ++b) {
        for (int a = 0; a < n1; ++a) {
            const auto from = static_cast<std::size_t>(a + n1 * b);
            const auto to = static_cast<std::size_t>((n1 - 1 - a) + n1 * (n2 - 1 - b));
            for (std::size_t xn = 0; xn < x_nodes_; ++xn) out[node(xn, to)] = trace[node(xn, from)];
        }
    }
    return out;
}

Moments trace_moments(const PhaseGrid& grid, std::span<const double> trace) {
    Moments m;
    const auto& xw = grid.x_weights();
    for (std::size_t vn = 0; vn < grid.v_nodes(); ++vn) {
        double fx = 0.0;
        for (std::size_t xn = 0; xn < grid.x_nodes(); ++xn) fx += xw[xn] * trace[grid.node(xn, vn)];
        m.mass += fx * grid.mass_weights()[vn];
        m.kinetic1 += 0.5 * fx * grid.kinetic_weights(0)[vn];
        m.kinetic2 += 0.5 * fx * grid.kinetic_weights(1)[vn];
    }
    return m;
}

SlabSolver::SlabSolver(const PhaseGrid& grid, const sd::SlabSpace& field_space, double slab_length,
                       double x_scale, sparse::SolverOptions options)
    : grid_(&grid), field_space_(&field_space), x_scale_(x_scale), options_(options),
      assembler_(grid.phase(), slab_length),
      field_tables_(sd::make_cell_tables(field_space, slab_length, grid.degree() + 2)) {
    if (field_space.dim() != 1 || field_space.components() != 3 || field_space.degree() != grid.degree() ||
        field_space.spatial_nodes() != grid.x_nodes()) {
        throw AssemblyError("vlasov slab solver: field space must be the reduced field space on the same x mesh");
    }
    const auto& pm = grid.phase().mesh();
    for (int i = 0; i < pm.cells(1); ++i) v_origin1_.push_back(pm.bounds(1).lo + i * pm.cell_size(1));
    for (int i = 0; i < pm.cells(2); ++i) v_origin2_.push_back(pm.bounds(2).lo + i * pm.cell_size(2));
}

FieldSamples SlabSolver::sample(std::span<const double> field_slab) const {
    const auto& fs = *field_space_;
    const int nl = field_tables_.functions;
    const int nq = field_tables_.points;
    const std::size_t cells = fs.mesh().cell_count();
    FieldSamples out(cells * static_cast<std::size_t>(nq) * 3);
    std::vector<double> local(static_cast<std::size_t>(nl * 3));
    for (std::size_t cell = 0; cell < cells; ++cell) {
        fs.gather(field_slab, cell, local);
        const Eigen::Map<const Eigen::MatrixXd> coeffs(local.data(), nl, 3);
        const Eigen::MatrixXd vals = field_tables_.value * coeffs;
        for (int q = 0; q < nq; ++q) {
            for (int c = 0; c < 3; ++c) out[(cell * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q)) * 3 + static_cast<std::size_t>(c)] = vals(q, c);
        }
    }
    return out;
}

FieldSamples SlabSolver::sample(const std::function<FieldPoint(double, std::span<const double>)>& field,
                                double t0) const {
    const auto& xm = field_space_->mesh();
    const int nq = field_tables_.points;
    FieldSamples out(xm.cell_count() * static_cast<std::size_t>(nq) * 3);
    std::vector<double> x(1);
    for (std::size_t cell = 0; cell < xm.cell_count(); ++cell) {
        const double x0 = xm.cell_origin(cell)[0];
        for (int q = 0; q < nq; ++q) {
            x[0] = x0 + field_tables_.offset_at(q, 1);
            const auto f = field(t0 + field_tables_.offset_at(q, 0), x);
            const std::size_t o = (cell * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q)) * 3;
            out[o] = f.e[0];
            out[o + 1] = f.e[1];
            out[o + 2] = f.b[2];
        }
    }
    return out;
}

sd::CoefficientFill SlabSolver::coefficients(const FieldSamples& samples) const {
    const auto& pm = grid_->phase().mesh();
    const auto& t = assembler_.tables();
    const int n = t.points_per_dir;
    const int nxq = n * n;  // (t, x) points per phase point block
    const int nx = pm.cells(0);
    const int nv1 = pm.cells(1);
    const bool rel = grid_->relativistic();
    const double xs = x_scale_;
    return [&samples, &t, nxq, nx, nv1, rel, xs, this](std::size_t cell, std::span<double> out) {
        const auto ix = static_cast<std::size_t>(static_cast<int>(cell) % nx);
        const int iv = static_cast<int>(cell) / nx;
        const double o1 = v_origin1_[static_cast<std::size_t>(iv % nv1)];
        const double o2 = v_origin2_[static_cast<std::size_t>(iv / nv1)];
        const double* f = samples.data() + ix * static_cast<std::size_t>(nxq) * 3;
        for (int q = 0; q < t.points; ++q) {
            const double v1 = o1 + t.offset_at(q, 2);
            const double v2 = o2 + t.offset_at(q, 3);
            double w1 = v1;
            double w2 = v2;
            if (rel) {
                const double s = 1.0 / std::sqrt(1.0 + v1 * v1 + v2 * v2);
                w1 *= s;
                w2 *= s;
            }
            const double* fe = f + static_cast<std::size_t>(q % nxq) * 3;
            const auto o = static_cast<std::size_t>(q) * 3;
            out[o] = w1 * xs;
            out[o + 1] = fe[0] + w2 * fe[2];
            out[o + 2] = fe[1] - w1 * fe[2];
        }
    };
}

const sparse::CsrMatrix& SlabSolver::assemble(std::span<const double> delta, const FieldSamples& samples) {
    assembler_.assemble_matrix(delta, coefficients(samples), false, matrix_);
    return matrix_;
}

DensityState SlabSolver::solve(int slab, std::span<const double> delta, std::span<const double> incoming,
                               const FieldSamples& samples, std::span<const double> guess,
                               sparse::SolveReport* report) {
    const auto& a = assemble(delta, samples);
    std::vector<double> rhs(grid_->phase().slab_size(), 0.0);
    assembler_.add_incoming(incoming, rhs);
    DensityState st;
    st.slab = slab;
    st.coefficients = sparse::solve(a, rhs, options_, guess, report);
    st.incoming.assign(incoming.begin(), incoming.end());
    const auto out = grid_->phase().minus_trace(st.coefficients);
    st.outgoing.assign(out.begin(), out.end());
    return st;
}

std::vector<double> SlabSolver::current(std::span<const double> density_slab) const {
    const auto& ps = grid_->phase();
    if (density_slab.size() != ps.slab_size()) throw AssemblyError("current: density slab size mismatch");
    const std::size_t nxn = grid_->x_nodes();
    const std::size_t nvn = grid_->v_nodes();
    const auto& w1 = grid_->current_weights(0);
    const auto& w2 = grid_->current_weights(1);
    std::vector<double> j(field_space_->slab_size(), 0.0);
    for (int a = 0; a <= ps.degree(); ++a) {
        const std::size_t base = static_cast<std::size_t>(a) * ps.spatial_nodes();
        for (std::size_t vn = 0; vn < nvn; ++vn) {
            const double* f = density_slab.data() + base + nxn * vn;
            for (std::size_t xn = 0; xn < nxn; ++xn) {
                j[field_space_->slab_dof(a, xn, 0)] += f[xn] * w1[vn];
                j[field_space_->slab_dof(a, xn, 1)] += f[xn] * w2[vn];
            }
        }
    }
    return j;
}

maxwell::TripleNorm triple_norm_vlasov(SlabSolver& solver, const std::vector<std::vector<double>>& slabs,
                                       const std::vector<FieldSamples>& fields,
                                       const std::vector<std::vector<double>>& deltas) {
    if (slabs.size() != fields.size() || slabs.size() != deltas.size()) {
        throw AssemblyError("triple_norm_vlasov: one field and delta set per slab required");
    }
    const auto& space = solver.grid().phase();
    maxwell::TripleNorm n;
    if (slabs.empty()) return n;
    n.initial = sd::trace_norm2(space, space.plus_trace(slabs.front()));
    n.final = sd::trace_norm2(space, space.minus_trace(slabs.back()));
    std::vector<double> jump(space.trace_size());
    for (std::size_t m = 0; m < slabs.size(); ++m) {
        n.streaming += sd::weighted_streaming_residual(space, solver.tables(), slabs[m], deltas[m],
                                                       solver.coefficients(fields[m]), false);
        if (m == 0) continue;
        const auto plus = space.plus_trace(slabs[m]);
        const auto minus = space.minus_trace(slabs[m - 1]);
        for (std::size_t i = 0; i < jump.size(); ++i) jump[i] = plus[i] - minus[i];
        n.jumps += sd::trace_norm2(space, jump);
    }
    return n;
}

}  // namespace vmsd::vlasov
