#include "vmsd/maxwell_sd.hpp"

#include <algorithm>

#include "vmsd/errors.hpp"

namespace vmsd::maxwell {

FluxMatrices flux_matrices(FieldMode mode, double scale) {
    FluxMatrices f;
    if (mode == FieldMode::reduced1half) {
        f.dim = 1;
        f.components = 3;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
        m(1, 2) = 1.0;
        m(2, 1) = 1.0;
        f.m.push_back(scale * m);
        return f;
    }
    f.dim = 3;
    f.components = 6;
    // Rows: dE/dt - curl B = -j, dB/dt + curl E = 0, written as sum_l M_l d_l W.
    Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(6, 6);
    m1(1, 5) = 1.0;
    m1(2, 4) = -1.0;
    m1(4, 2) = -1.0;
    m1(5, 1) = 1.0;
    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(6, 6);
    m2(0, 5) = -1.0;
    m2(2, 3) = 1.0;
    m2(3, 2) = 1.0;
    m2(5, 0) = -1.0;
    Eigen::MatrixXd m3 = Eigen::MatrixXd::Zero(6, 6);
    m3(0, 4) = 1.0;
    m3(1, 3) = -1.0;
    m3(3, 1) = -1.0;
    m3(4, 0) = 1.0;
    f.m = {scale * m1, scale * m2, scale * m3};
    return f;
}

std::vector<double> apply_flux(const FluxMatrices& flux, std::span<const double> grad) {
    const int nc = flux.components;
    if (grad.size() != static_cast<std::size_t>(flux.dim * nc)) {
        throw AssemblyError("apply_flux: gradient must hold dim * components entries");
    }
    std::vector<double> out(static_cast<std::size_t>(nc), 0.0);
    for (int l = 0; l < flux.dim; ++l) {
        const auto& m = flux.m[static_cast<std::size_t>(l)];
        for (int r = 0; r < nc; ++r) {
            for (int c = 0; c < nc; ++c) out[static_cast<std::size_t>(r)] += m(r, c) * grad[static_cast<std::size_t>(l * nc + c)];
        }
    }
    return out;
}

sd::CoefficientFill constant_coefficients(const FluxMatrices& flux, int points) {
    const int nc = flux.components;
    const int dim = flux.dim;
    std::vector<double> one(static_cast<std::size_t>(dim * nc * nc));
    for (int l = 0; l < dim; ++l) {
        for (int r = 0; r < nc; ++r) {
            for (int c = 0; c < nc; ++c) one[static_cast<std::size_t>((l * nc + r) * nc + c)] = flux.m[static_cast<std::size_t>(l)](r, c);
        }
    }
    return [one, points](std::size_t, std::span<double> out) {
        for (int q = 0; q < points; ++q) {
            std::copy(one.begin(), one.end(), out.begin() + static_cast<std::ptrdiff_t>(q) * static_cast<std::ptrdiff_t>(one.size()));
        }
    };
}

sd::SourceFill pointwise_source(const sd::SlabSpace& space, const sd::CellTables& tables, double t0,
                                PointSource source) {
    return [&space, &tables, t0, source = std::move(source)](std::size_t cell, std::span<double> out) {
        const int nc = space.components();
        const int dim = space.dim();
        const auto origin = space.mesh().cell_origin(cell);
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (int q = 0; q < tables.points; ++q) {
            for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = origin[static_cast<std::size_t>(d)] + tables.offset_at(q, d + 1);
            source(t0 + tables.offset_at(q, 0), x,
                   out.subspan(static_cast<std::size_t>(q * nc), static_cast<std::size_t>(nc)));
        }
    };
}

sd::SourceFill current_source(const sd::SlabSpace& space, const sd::CellTables& tables,
                              std::span<const double> current) {
    if (current.size() != space.slab_size()) throw AssemblyError("current_source: current must be a field slab vector");
    return [&space, &tables, current](std::size_t cell, std::span<double> out) {
        const int nc = space.components();
        const int nl = tables.functions;
        std::vector<double> local(static_cast<std::size_t>(nl * nc));
        space.gather(current, cell, local);
        const Eigen::Map<const Eigen::MatrixXd> coeffs(local.data(), nl, nc);
        const Eigen::MatrixXd vals = tables.value * coeffs;
        for (int q = 0; q < tables.points; ++q) {
            for (int c = 0; c < nc; ++c) out[static_cast<std::size_t>(q * nc + c)] = -vals(q, c);
        }
    };
}

SlabSolver::SlabSolver(const sd::SlabSpace& space, double slab_length, FluxMatrices flux,
                       sparse::SolverOptions options)
    : space_(&space), flux_(std::move(flux)), options_(options), assembler_(space, slab_length) {
    if (flux_.dim != space.dim() || flux_.components != space.components()) {
        throw AssemblyError("maxwell slab solver: flux matrices do not match the slab space");
    }
    coefficients_ = constant_coefficients(flux_, assembler_.tables().points);
}

SlabSolver::~SlabSolver() = default;
SlabSolver::SlabSolver(SlabSolver&&) noexcept = default;

const sparse::CsrMatrix& SlabSolver::matrix(std::span<const double> delta) {
    if (matrix_.rows() == 0 || !std::equal(delta.begin(), delta.end(), delta_.begin(), delta_.end())) {
        assembler_.assemble_matrix(delta, coefficients_, true, matrix_);
        delta_.assign(delta.begin(), delta.end());
        lu_.reset();
    }
    return matrix_;
}

std::vector<double> SlabSolver::rhs(std::span<const double> delta, std::span<const double> incoming,
                                    const sd::SourceFill* source) const {
    std::vector<double> r(space_->slab_size(), 0.0);
    assembler_.add_incoming(incoming, r);
    if (source) assembler_.add_source(delta, coefficients_, true, *source, r);
    return r;
}

FieldState SlabSolver::solve(int slab, std::span<const double> delta, std::span<const double> incoming,
                             const sd::SourceFill* source) {
    const auto& a = matrix(delta);
    const auto r = rhs(delta, incoming, source);
    FieldState st;
    st.slab = slab;
    // The matrix is reused across slabs, so automatic mode always keeps a factorization.
    if (options_.kind != sparse::SolverKind::iterative) {
        if (!lu_) lu_ = std::make_unique<sparse::Factorization>(a, options_.tolerance);
        st.coefficients = lu_->solve(r);
    } else {
        st.coefficients = sparse::solve(a, r, options_);
    }
    st.incoming.assign(incoming.begin(), incoming.end());
    const auto out = space_->minus_trace(st.coefficients);
    st.outgoing.assign(out.begin(), out.end());
    return st;
}

TripleNorm triple_norm_maxwell(const sd::SlabSpace& space, const FluxMatrices& flux, double slab_length,
                               const std::vector<std::vector<double>>& slabs,
                               const std::vector<std::vector<double>>& deltas) {
    if (slabs.size() != deltas.size()) throw AssemblyError("triple_norm_maxwell: one delta set per slab required");
    TripleNorm n;
    if (slabs.empty()) return n;
    const auto tables = sd::make_cell_tables(space, slab_length, space.degree() + 2);
    const auto coeffs = constant_coefficients(flux, tables.points);
    n.initial = sd::trace_norm2(space, space.plus_trace(slabs.front()));
    n.final = sd::trace_norm2(space, space.minus_trace(slabs.back()));
    std::vector<double> jump(space.trace_size());
    for (std::size_t m = 0; m < slabs.size(); ++m) {
        n.streaming += sd::weighted_streaming_residual(space, tables, slabs[m], deltas[m], coeffs, true);
        if (m == 0) continue;
        const auto plus = space.plus_trace(slabs[m]);
        const auto minus = space.minus_trace(slabs[m - 1]);
        for (std::size_t i = 0; i < jump.size(); ++i) jump[i] = plus[i] - minus[i];
        n.jumps += sd::trace_norm2(space, jump);
    }
    return n;
}

}  // namespace vmsd::maxwell
