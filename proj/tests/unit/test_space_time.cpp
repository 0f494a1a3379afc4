#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vmsd/maxwell_sd.hpp"
#include "vmsd/space_time.hpp"

using namespace vmsd;

TEST(SlabSpace, NodeCounts) {
    sd::SlabSpace periodic(mesh::TensorMesh({{0.0, 1.0}}, {5}, {true}), 2, 3);
    EXPECT_EQ(periodic.spatial_nodes(), 10u);
    EXPECT_EQ(periodic.trace_size(), 30u);
    EXPECT_EQ(periodic.slab_size(), 90u);
    EXPECT_EQ(periodic.local_functions(), 9);
    sd::SlabSpace dirichlet(mesh::TensorMesh({{0.0, 1.0}, {0.0, 1.0}}, {3, 2}, {false, false}), 1, 1);
    EXPECT_EQ(dirichlet.spatial_nodes(), 2u);  // (3-1) x (2-1) interior nodes
    EXPECT_EQ(dirichlet.spatial_node(0, 0), -1);
}

TEST(SlabSpace, TraceMassIntegratesConstants) {
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 2.0}}, {7}, {true}), 3, 1);
    std::vector<double> one(s.trace_size(), 1.0);
    EXPECT_NEAR(s.trace_mass().quadratic_form(one, one), 2.0, 1e-13);
    EXPECT_NEAR(sd::trace_norm2(s, one), 2.0, 1e-13);
}

TEST(SlabSpace, ProjectionReproducesDiscreteFunctions) {
    // x(1 - x)(2 - y) y lies in the degree-2 space with zero boundary values.
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}, {0.0, 2.0}}, {3, 2}, {false, false}), 2, 1);
    auto f = [](std::span<const double> x) { return x[0] * (1 - x[0]) * x[1] * (2 - x[1]); };
    const auto tr = s.project_trace([&](std::span<const double> x, std::span<double> v) { v[0] = f(x); });
    for (double a : {0.1, 0.45, 0.9}) {
        for (double b : {0.3, 1.0, 1.7}) {
            const double p[] = {a, b};
            EXPECT_NEAR(s.eval_trace(tr, p)[0], f(p), 1e-11);
        }
    }
}

TEST(SlabSpace, TracesAreEndBlocks) {
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}}, {2}, {true}), 2, 2);
    std::vector<double> slab(s.slab_size());
    for (std::size_t i = 0; i < slab.size(); ++i) slab[i] = static_cast<double>(i);
    EXPECT_EQ(s.plus_trace(slab)[0], 0.0);
    EXPECT_EQ(s.minus_trace(slab)[0], static_cast<double>(2 * s.trace_size()));
    EXPECT_EQ(s.slab_dof(1, 3, 1), (1 * s.spatial_nodes() + 3) * 2 + 1);
    // The slab evaluation at tau = +1 matches the outgoing trace.
    const double p[] = {0.3};
    const auto end = s.eval_slab(slab, 1.0, p);
    const auto tr = s.eval_trace(s.minus_trace(slab), p);
    EXPECT_NEAR(end[0], tr[0], 1e-12);
    EXPECT_NEAR(end[1], tr[1], 1e-12);
}

TEST(SlabSpace, L2ErrorOfExactSlabVanishes) {
    // u(t, x) = t * sin(2 pi x) is not discrete; t * (constant) is.
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}}, {4}, {true}), 1, 1);
    const double k = 0.5;
    const auto tables = sd::make_cell_tables(s, k, 3);
    std::vector<double> slab(s.slab_size());
    for (std::size_t n = 0; n < s.spatial_nodes(); ++n) {
        slab[s.slab_dof(0, n, 0)] = 1.0 * 2.0;  // t = 1 at slab start (t0 = 1)
        slab[s.slab_dof(1, n, 0)] = 1.5 * 2.0;
    }
    const double e = sd::slab_l2_error2(s, tables, slab, 1.0, [](double t, std::span<const double>, std::span<double> v) {
        v[0] = 2.0 * t;
    });
    EXPECT_LT(e, 1e-26);
}

TEST(GlobalForm, MatchesTripleNormOnSmallMesh) {
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}}, {3}, {true}), 1, 3);
    const double k = 0.2;
    const auto flux = maxwell::flux_matrices(maxwell::FieldMode::reduced1half);
    maxwell::SlabSolver solver(s, k, flux);
    const std::vector<double> delta(3, 0.1);
    const auto& a = solver.matrix(delta);
    std::mt19937 rng(3);
    std::normal_distribution<double> n;
    std::vector<std::vector<double>> g(3, std::vector<double>(s.slab_size()));
    for (auto& v : g)
        for (auto& x : v) x = n(rng);
    const double form = sd::global_form(s, {&a, &a, &a}, g);
    const auto tn = maxwell::triple_norm_maxwell(s, flux, k, g, {delta, delta, delta});
    EXPECT_NEAR(form, tn.squared(), 1e-12 * tn.squared());
}

TEST(Threads, SetAndQuery) {
    sd::set_thread_count(1);
    EXPECT_EQ(sd::thread_count(), 1);
}
