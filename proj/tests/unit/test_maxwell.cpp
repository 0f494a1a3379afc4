#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vmsd/maxwell_sd.hpp"

using namespace vmsd;
using namespace vmsd::maxwell;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(Flux, MatricesAreSymmetric) {
    for (auto mode : {FieldMode::full3d, FieldMode::reduced1half}) {
        const auto f = flux_matrices(mode, 0.7);
        for (const auto& m : f.m) EXPECT_EQ((m - m.transpose()).norm(), 0.0);
    }
}

TEST(Flux, FullSystemIsCurlForm) {
    // sum_l M_l dW/dx_l = (-curl B, curl E) for W = (E, B).
    const auto f = flux_matrices(FieldMode::full3d);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> grad(18);  // grad[l * 6 + c] = dW_c / dx_l
    for (auto& g : grad) g = u(rng);
    auto d = [&](int c, int l) { return grad[static_cast<std::size_t>(l * 6 + c)]; };
    const double curl_e[3] = {d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)};
    const double curl_b[3] = {d(5, 1) - d(4, 2), d(3, 2) - d(5, 0), d(4, 0) - d(3, 1)};
    const auto out = apply_flux(f, grad);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(out[static_cast<std::size_t>(i)], -curl_b[i], 1e-15);
        EXPECT_NEAR(out[static_cast<std::size_t>(3 + i)], curl_e[i], 1e-15);
    }
}

TEST(Flux, ReducedSystemCouplesE2AndB) {
    const auto f = flux_matrices(FieldMode::reduced1half, 0.5);
    ASSERT_EQ(f.dim, 1);
    const auto out = apply_flux(f, std::vector<double>{1.0, 2.0, 3.0});
    EXPECT_EQ(out, (std::vector<double>{0.0, 1.5, 1.0}));
}

TEST(SlabSolver, ZeroDataStaysZero) {
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}}, {4}, {true}), 1, 3);
    SlabSolver solver(s, 0.25, flux_matrices(FieldMode::reduced1half));
    const std::vector<double> delta(4, 0.05);
    const auto st = solver.solve(0, delta, std::vector<double>(s.trace_size(), 0.0));
    for (double v : st.coefficients) EXPECT_EQ(v, 0.0);
}

TEST(SlabSolver, ConstantStateIsStationary) {
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}}, {4}, {true}), 2, 3);
    SlabSolver solver(s, 0.25, flux_matrices(FieldMode::reduced1half));
    const std::vector<double> delta(4, 0.05);
    std::vector<double> w(s.trace_size());
    for (std::size_t n = 0; n < s.spatial_nodes(); ++n) {
        w[n * 3] = 1.0;
        w[n * 3 + 1] = -2.0;
        w[n * 3 + 2] = 0.5;
    }
    const auto st = solver.solve(0, delta, w);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(st.outgoing[i], w[i], 1e-11);
}

TEST(SlabSolver, TravelingWaveOneSlab) {
    // E2 = B = sin(2 pi (x - t)) solves E2_t + B_x = 0, B_t + E2_x = 0.
    const int n = 32;
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}}, {n}, {true}), 2, 3);
    const double k = 1.0 / n;
    SlabSolver solver(s, k, flux_matrices(FieldMode::reduced1half));
    const std::vector<double> delta(n, 0.05);
    auto exact = [](double t, std::span<const double> x, std::span<double> v) {
        v[0] = 0.0;
        v[1] = std::sin(2 * pi * (x[0] - t));
        v[2] = v[1];
    };
    auto w = s.project_trace([&](std::span<const double> x, std::span<double> v) { exact(0.0, x, v); });
    const auto st = solver.solve(0, delta, w);
    const double err = std::sqrt(sd::slab_l2_error2(s, solver.tables(), st.coefficients, 0.0, exact));
    EXPECT_LT(err, 1e-4);
}

TEST(SlabSolver, MatrixCachedForSameDelta) {
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}}, {4}, {true}), 1, 3);
    SlabSolver solver(s, 0.25, flux_matrices(FieldMode::reduced1half));
    const std::vector<double> d1(4, 0.05);
    const std::vector<double> d2(4, 0.1);
    const auto* a = &solver.matrix(d1);
    const double v = a->values()[0];
    EXPECT_EQ(&solver.matrix(d1), a);
    const auto& b = solver.matrix(d2);
    EXPECT_EQ(b.rows(), a->rows());
    EXPECT_NE(b.values()[0], v);
}

TEST(TripleNorm, PartsAreNonnegative) {
    sd::SlabSpace s(mesh::TensorMesh({{0.0, 1.0}}, {3}, {false}), 1, 3);
    const auto f = flux_matrices(FieldMode::reduced1half);
    std::vector<std::vector<double>> g(2, std::vector<double>(s.slab_size(), 0.3));
    const std::vector<double> delta(3, 0.05);
    const auto tn = triple_norm_maxwell(s, f, 0.1, g, {delta, delta});
    EXPECT_GT(tn.initial, 0.0);
    EXPECT_GT(tn.final, 0.0);
    EXPECT_NEAR(tn.jumps, 0.0, 1e-14);  // constant in time, no jump
    EXPECT_GE(tn.streaming, 0.0);
}
