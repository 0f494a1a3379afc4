#include "vmsd/convergence.hpp"

#include <cmath>
#include <numbers>

#include "vmsd/errors.hpp"
#include "vmsd/maxwell_sd.hpp"
#include "vmsd/vlasov_sd.hpp"

namespace vmsd::convergence {

namespace {

constexpr double pi = std::numbers::pi;

double order(double coarse, double fine) { return coarse > 0.0 && fine > 0.0 ? std::log2(coarse / fine) : 0.0; }

void check_cells(std::span<const int> cells) {
    if (cells.empty()) throw InvalidConfig("convergence study needs at least one mesh");
    for (int n : cells) {
        if (n < 1) throw InvalidConfig("convergence study: cell counts must be positive");
    }
}

}  // namespace

void fill_orders(std::vector<SdRow>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].order = i == 0 ? 0.0 : order(rows[i - 1].error, rows[i].error) / std::log2(rows[i - 1].h / rows[i].h);
    }
}

std::vector<SdRow> maxwell_manufactured(const SdStudy& study, std::span<const int> cells) {
    check_cells(cells);
    std::vector<SdRow> rows;
    for (int n : cells) {
        mesh::TensorMesh m({{0.0, 1.0}}, {n}, {true});
        sd::SlabSpace space(m, study.degree, 3);
        const int slabs = std::max(1, static_cast<int>(std::lround(study.final_time * n)));
        const double k = study.final_time / slabs;
        maxwell::SlabSolver solver(space, k, maxwell::flux_matrices(maxwell::FieldMode::reduced1half), study.solver);
        const std::vector<double> delta(static_cast<std::size_t>(n), study.delta);
        auto exact = [](double t, std::span<const double> x, std::span<double> w) {
            w[0] = std::sin(2 * pi * x[0]) * std::sin(2 * pi * t);
            w[1] = std::sin(2 * pi * x[0]) * std::cos(2 * pi * t);
            w[2] = -std::cos(2 * pi * x[0]) * std::sin(2 * pi * t);
        };
        auto source = [](double t, std::span<const double> x, std::span<double> b) {
            b[0] = 2 * pi * std::sin(2 * pi * x[0]) * std::cos(2 * pi * t);
            b[1] = 0.0;
            b[2] = 0.0;
        };
        auto w = space.project_trace([&](std::span<const double> x, std::span<double> v) { exact(0.0, x, v); });
        double err = 0.0;
        for (int s = 0; s < slabs; ++s) {
            const auto f = maxwell::pointwise_source(space, solver.tables(), s * k, source);
            const auto st = solver.solve(s, delta, w, &f);
            err += sd::slab_l2_error2(space, solver.tables(), st.coefficients, s * k, exact);
            w = st.outgoing;
        }
        rows.push_back({n, 1.0 / n, k, std::sqrt(err), 0.0});
    }
    fill_orders(rows);
    return rows;
}

std::vector<SdRow> free_streaming(const SdStudy& study, std::span<const int> cells) {
    check_cells(cells);
    auto bump = [](double v) {
        const double a = 1.0 - v * v;
        return a * a;
    };
    auto f0 = [&](double x, double v1, double v2) { return std::sin(2 * pi * x) * bump(v1) * bump(v2); };
    std::vector<SdRow> rows;
    for (int n : cells) {
        vlasov::PhaseGrid grid({0.0, 1.0}, n, {-1.0, 1.0}, {-1.0, 1.0}, n, n, study.degree, false);
        sd::SlabSpace field_space(grid.x_mesh(), study.degree, 3);
        // Slab length twice the x spacing: with |v| <= 1 this keeps k ~ h.
        const int slabs = std::max(1, static_cast<int>(std::lround(study.final_time * n / 2.0)));
        const double k = study.final_time / slabs;
        vlasov::SlabSolver solver(grid, field_space, k, 1.0, study.solver);
        const auto zero = solver.sample([](double, std::span<const double>) { return vlasov::FieldPoint{}; }, 0.0);
        const std::vector<double> delta(grid.phase().mesh().cell_count(), study.delta);
        auto trace = grid.phase().project_trace(
            [&](std::span<const double> x, std::span<double> v) { v[0] = f0(x[0], x[1], x[2]); });
        double err = 0.0;
        for (int s = 0; s < slabs; ++s) {
            const auto st = solver.solve(s, delta, trace, zero);
            trace = st.outgoing;
            err += sd::slab_l2_error2(grid.phase(), solver.tables(), st.coefficients, s * k,
                                      [&](double t, std::span<const double> x, std::span<double> v) {
                                          v[0] = f0(x[0] - x[1] * t, x[1], x[2]);
                                      });
        }
        rows.push_back({n, 1.0 / n, k, std::sqrt(err), 0.0});
    }
    fill_orders(rows);
    return rows;
}

void manufactured_field(std::span<const double> x, std::span<double> out) {
    const double sx = std::sin(pi * x[0]);
    const double sy = std::sin(pi * x[1]);
    out[0] = pi * sx * sx * std::sin(2 * pi * x[1]);
    out[1] = -pi * std::sin(2 * pi * x[0]) * sy * sy;
    out[2] = -2 * pi * pi * (std::cos(2 * pi * x[0]) * sy * sy + sx * sx * std::cos(2 * pi * x[1]));
}

void manufactured_curl_curl(std::span<const double> x, std::span<double> out) {
    // curl w = (dw/dy, -dw/dx) for the scalar curl w of the manufactured field.
    const double sx = std::sin(pi * x[0]);
    const double sy = std::sin(pi * x[1]);
    const double c = -2 * pi * pi;
    out[0] = c * (std::cos(2 * pi * x[0]) * pi * std::sin(2 * pi * x[1]) - sx * sx * 2 * pi * std::sin(2 * pi * x[1]));
    out[1] = -c * (-2 * pi * std::sin(2 * pi * x[0]) * sy * sy + pi * std::sin(2 * pi * x[0]) * std::cos(2 * pi * x[1]));
}

namespace {

void fill_nitsche_orders(std::vector<NitscheRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double r = std::log2(rows[i - 1].h / rows[i].h);
        rows[i].l2_order = order(rows[i - 1].error.l2, rows[i].error.l2) / r;
        rows[i].h_order = order(rows[i - 1].error.h_norm, rows[i].error.h_norm) / r;
        rows[i].triple_order = order(rows[i - 1].error.triple, rows[i].error.triple) / r;
    }
}

}  // namespace

std::vector<NitscheRow> ritz_study(double gamma, std::span<const int> cells) {
    check_cells(cells);
    std::vector<NitscheRow> rows;
    for (int n : cells) {
        nitsche::Params p;
        p.gamma = gamma;
        p.cells = n;
        nitsche::Space space(p);
        const auto ops = nitsche::assemble(space);
        const auto q = nitsche::ritz_project(space, ops, manufactured_field);
        rows.push_back({space.h(), 0.0, nitsche::errors(space, q, manufactured_field)});
    }
    fill_nitsche_orders(rows);
    return rows;
}

std::vector<NitscheRow> nitsche_convergence(double gamma, std::span<const int> cells, double final_time,
                                            double ratio) {
    check_cells(cells);
    if (!(final_time > 0.0) || !(ratio > 0.0)) throw InvalidConfig("nitsche convergence: T and k/h must be positive");
    std::vector<NitscheRow> rows;
    for (int n : cells) {
        nitsche::Params p;
        p.gamma = gamma;
        p.cells = n;
        nitsche::Space space(p);
        const auto ops = nitsche::assemble(space);
        const int steps = std::max(2, static_cast<int>(std::lround(final_time / (ratio * space.h()))));
        const double k = final_time / steps;

        // Time derivatives of E = cos(t) u at t = 0: u, 0, -u, 0.
        const nitsche::ExactField zero = [](std::span<const double>, std::span<double> o) {
            std::fill(o.begin(), o.end(), 0.0);
        };
        const nitsche::ExactField minus = [](std::span<const double> x, std::span<double> o) {
            manufactured_field(x, o);
            for (auto& v : o) v = -v;
        };
        auto [prev2, prev1] = nitsche::startup(space, ops, {manufactured_field, zero, minus, zero}, k);
        nitsche::TimeStepper stepper(ops, k);
        for (int m = 2; m <= steps; ++m) {
            const double t = (m - 1) * k;
            // j_t = -E_tt - curl curl E = cos(t) (u - curl curl u)
            const auto load = nitsche::load(space, [t](std::span<const double> x, std::span<double> o) {
                double u[3];
                double cc[2];
                manufactured_field(x, u);
                manufactured_curl_curl(x, cc);
                o[0] = std::cos(t) * (u[0] - cc[0]);
                o[1] = std::cos(t) * (u[1] - cc[1]);
            });
            auto next = stepper.step(prev2, prev1, load);
            prev2 = std::move(prev1);
            prev1 = std::move(next);
        }
        const double tf = steps * k;
        const auto e = nitsche::errors(space, prev1, [tf](std::span<const double> x, std::span<double> o) {
            manufactured_field(x, o);
            for (auto& v : o) v *= std::cos(tf);
        });
        rows.push_back({space.h(), k, e});
    }
    fill_nitsche_orders(rows);
    return rows;
}

}  // namespace vmsd::convergence
