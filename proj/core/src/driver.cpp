#include "vmsd/driver.hpp"

#include <cmath>
#include <numbers>

#include "vmsd/errors.hpp"

namespace vmsd::driver {

double WeibelCase::length() const { return 2.0 * std::numbers::pi / k0; }

WeibelCase WeibelCase::preset(int id) {
    if (id == 1) return WeibelCase{};
    if (id == 2) return WeibelCase{1.0 / 6.0, -0.5, -0.1, 0.2, 0.01, 0.001};
    throw InvalidConfig("weibel case must be 1 or 2, got " + std::to_string(id));
}

double weibel_density(const WeibelCase& c, double v1, double v2) {
    const double a = v2 - c.v01;
    const double b = v2 + c.v02;
    return std::exp(-v1 * v1 / c.beta) / (std::numbers::pi * c.beta) *
           (c.mu * std::exp(-a * a / c.beta) + (1.0 - c.mu) * std::exp(-b * b / c.beta));
}

double weibel_magnetic(const WeibelCase& c, double x) { return -c.b * std::sin(c.k0 * x); }

InitialData weibel_initial(const WeibelCase& c) {
    const double length = c.length();
    InitialData d;
    d.density = [c](double, double v1, double v2) { return weibel_density(c, v1, v2); };
    d.field = [c, length](double x) {
        vlasov::FieldPoint f;
        f.b[2] = weibel_magnetic(c, x * length);
        return f;
    };
    return d;
}

MeshPreset mesh_preset(const std::string& name) {
    if (name == "H1") return {"H1", 0.1, 0.1, 6};
    if (name == "H2") return {"H2", 0.05, 0.05, 12};
    if (name == "H3") return {"H3", 0.025, 0.025, 24};
    throw InvalidConfig("unknown mesh preset '" + name + "' (expected H1, H2 or H3)");
}

TrajectoryRow energies(const sd::SlabSpace& field_space, const vlasov::PhaseGrid& grid,
                       std::span<const double> field_trace, std::span<const double> density_trace) {
    TrajectoryRow row;
    const auto mw = field_space.apply_trace_mass(field_trace);
    for (std::size_t n = 0; n < field_space.spatial_nodes(); ++n) {
        row.e1 += 0.5 * mw[n * 3] * field_trace[n * 3];
        row.e2 += 0.5 * mw[n * 3 + 1] * field_trace[n * 3 + 1];
        row.b += 0.5 * mw[n * 3 + 2] * field_trace[n * 3 + 2];
    }
    const auto m = vlasov::trace_moments(grid, density_trace);
    row.k1 = m.kinetic1;
    row.k2 = m.kinetic2;
    row.mass = m.mass;
    return row;
}

namespace {

mesh::DeltaRule with_degree(mesh::DeltaRule rule, int degree) {
    std::visit([degree](auto& r) { r.degree = degree; }, rule);
    return rule;
}

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace

CoupledSolver::CoupledSolver(const Discretization& d, double length)
    : disc_(d), length_(length), time_(mesh::build_time_partition(d.final_time, d.slabs)) {
    if (d.max_iterations < 1) throw InvalidConfig("fixed point: max_iterations must be >= 1");
    if (!(d.tolerance >= 0.0)) throw InvalidConfig("fixed point: tolerance must be >= 0");
    if (!(length > 0.0)) throw InvalidConfig("domain length must be positive");
    grid_ = std::make_unique<vlasov::PhaseGrid>(mesh::Interval{0.0, 1.0}, d.x_cells, d.v1, d.v2, d.v_cells1,
                                                d.v_cells2, d.degree, d.relativistic);
    field_space_ = std::make_unique<sd::SlabSpace>(grid_->x_mesh(), d.degree, 3);
    const auto rule = with_degree(d.delta, d.degree);
    field_hp_ = mesh::assign_hp(grid_->x_mesh(), time_, rule);
    phase_hp_ = mesh::assign_hp(grid_->phase().mesh(), time_, rule);
    const double k = time_.step;
    maxwell_ = std::make_unique<maxwell::SlabSolver>(
        *field_space_, k, maxwell::flux_matrices(maxwell::FieldMode::reduced1half, 1.0 / length), d.solver);
    vlasov_ = std::make_unique<vlasov::SlabSolver>(*grid_, *field_space_, k, 1.0 / length, d.solver);
    field_.assign(field_space_->trace_size(), 0.0);
    density_.assign(grid_->phase().trace_size(), 0.0);
}

CoupledSolver::~CoupledSolver() = default;

void CoupledSolver::set_initial(const InitialData& data) {
    field_ = field_space_->project_trace([&](std::span<const double> x, std::span<double> out) {
        const auto f = data.field(x[0]);
        out[0] = f.e[0];
        out[1] = f.e[1];
        out[2] = f.b[2];
    });
    density_ = grid_->phase().project_trace(
        [&](std::span<const double> x, std::span<double> out) { out[0] = data.density(x[0], x[1], x[2]); });
}

void CoupledSolver::set_state(std::vector<double> field_trace, std::vector<double> density_trace) {
    if (field_trace.size() != field_space_->trace_size() || density_trace.size() != grid_->phase().trace_size()) {
        throw AssemblyError("coupled solver: state size mismatch");
    }
    field_ = std::move(field_trace);
    density_ = std::move(density_trace);
}

IterationLog CoupledSolver::step(int m) {
    const auto& ps = grid_->phase();
    // Predictor: the incoming density held constant over the slab.
    std::vector<double> f(ps.slab_size());
    for (int a = 0; a <= ps.degree(); ++a) {
        std::copy(density_.begin(), density_.end(), f.begin() + static_cast<std::ptrdiff_t>(a) * static_cast<std::ptrdiff_t>(ps.trace_size()));
    }
    const auto field_delta = field_hp_.slab_delta(m);
    const auto phase_delta = phase_hp_.slab_delta(m);
    IterationLog log;
    for (int i = 0; i < disc_.max_iterations; ++i) {
        const auto j = vlasov_->current(f);
        const auto source = maxwell::current_source(*field_space_, maxwell_->tables(), j);
        last_field_ = maxwell_->solve(m, field_delta, field_, &source);
        const auto samples = vlasov_->sample(last_field_.coefficients);
        last_density_ = vlasov_->solve(m, phase_delta, density_, samples, f);
        double diff = 0.0;
        for (std::size_t n = 0; n < f.size(); ++n) {
            const double e = last_density_.coefficients[n] - f[n];
            diff += e * e;
        }
        const double scale = norm2(last_density_.coefficients);
        const double res = scale > 0.0 ? std::sqrt(diff) / scale : std::sqrt(diff);
        log.residuals.push_back(res);
        f = last_density_.coefficients;
        if (res <= disc_.tolerance) {
            log.converged = true;
            break;
        }
    }
    field_ = last_field_.outgoing;
    density_ = last_density_.outgoing;
    return log;
}

TrajectoryRow CoupledSolver::diagnostics(double t) const {
    auto row = energies(*field_space_, *grid_, field_, density_);
    row.t = t;
    return row;
}

std::vector<TrajectoryRow> CoupledSolver::run(const std::function<void(const TrajectoryRow&)>& on_row) {
    std::vector<TrajectoryRow> rows;
    rows.push_back(diagnostics(0.0));
    if (on_row) on_row(rows.back());
    for (int m = 0; m < time_.slab_count(); ++m) {
        const auto log = step(m);
        auto row = diagnostics(time_.slab_end(m));
        row.iterations = static_cast<int>(log.residuals.size());
        row.residual = log.residuals.back();
        rows.push_back(row);
        if (on_row) on_row(row);
    }
    return rows;
}

Trajectory march(const Discretization& d, const WeibelCase& c,
                 const std::function<void(const TrajectoryRow&)>& on_row) {
    CoupledSolver solver(d, c.length());
    solver.set_initial(weibel_initial(c));
    Trajectory t;
    t.rows = solver.run(on_row);
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        if (t.rows[i].residual > d.tolerance) ++t.unconverged_slabs;
    }
    t.field_trace = solver.field_trace();
    t.density_trace = solver.density_trace();
    return t;
}

void reverse_state(const vlasov::PhaseGrid& grid, std::vector<double>& field_trace,
                   std::vector<double>& density_trace) {
    density_trace = grid.reflect_velocity(density_trace);
    for (std::size_t n = 2; n < field_trace.size(); n += 3) field_trace[n] = -field_trace[n];
}

namespace {

struct NormPair {
    double l1 = 0.0;
    double l2 = 0.0;
};

// L1 and L2 distance of one component of a trace vector from a pointwise function.
NormPair trace_distance(const sd::SlabSpace& space, std::span<const double> trace, int component,
                        const std::function<double(std::span<const double>)>& exact) {
    const auto tt = sd::make_trace_tables(space, space.degree() + 3);
    const int nc = space.components();
    const int nls = space.local_spatial_functions();
    std::vector<double> local(static_cast<std::size_t>(nls * nc));
    std::vector<double> x(static_cast<std::size_t>(space.dim()));
    NormPair n;
    for (std::size_t cell = 0; cell < space.mesh().cell_count(); ++cell) {
        space.gather_trace(trace, cell, local);
        const Eigen::Map<const Eigen::VectorXd> u(local.data() + component * nls, nls);
        const Eigen::VectorXd vals = tt.value * u;
        const auto origin = space.mesh().cell_origin(cell);
        for (int q = 0; q < tt.points; ++q) {
            for (int d = 0; d < space.dim(); ++d) x[static_cast<std::size_t>(d)] = origin[static_cast<std::size_t>(d)] + tt.offset_at(q, d);
            const double e = vals(q) - exact(x);
            const double w = tt.weight[static_cast<std::size_t>(q)];
            n.l1 += w * std::abs(e);
            n.l2 += w * e * e;
        }
    }
    n.l2 = std::sqrt(n.l2);
    return n;
}

}  // namespace

std::vector<ErrorEntry> reversibility_test(const Discretization& d, const WeibelCase& c) {
    CoupledSolver solver(d, c.length());
    const auto init = weibel_initial(c);
    // Validates the velocity box before any work is done.
    (void)solver.grid().reflect_velocity(std::vector<double>(solver.grid().phase().trace_size(), 0.0));
    solver.set_initial(init);
    solver.run();
    auto field = solver.field_trace();
    auto density = solver.density_trace();
    reverse_state(solver.grid(), field, density);
    solver.set_state(std::move(field), std::move(density));
    solver.run();

    const auto& ps = solver.grid().phase();
    const auto& fs = solver.field_space();
    std::vector<ErrorEntry> out;
    const auto nf = trace_distance(ps, solver.density_trace(), 0, [&](std::span<const double> x) {
        return init.density(x[0], -x[1], -x[2]);
    });
    const auto ne1 = trace_distance(fs, solver.field_trace(), 0, [&](std::span<const double> x) { return init.field(x[0]).e[0]; });
    const auto ne2 = trace_distance(fs, solver.field_trace(), 1, [&](std::span<const double> x) { return init.field(x[0]).e[1]; });
    const auto nb = trace_distance(fs, solver.field_trace(), 2, [&](std::span<const double> x) { return -init.field(x[0]).b[2]; });
    const std::pair<const char*, NormPair> all[] = {{"f", nf}, {"E1", ne1}, {"E2", ne2}, {"B", nb}};
    for (const auto& [name, n] : all) out.push_back({name, "L1", n.l1});
    for (const auto& [name, n] : all) out.push_back({name, "L2", n.l2});
    return out;
}

}  // namespace vmsd::driver
