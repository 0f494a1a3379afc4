#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vmsd/errors.hpp"
#include "vmsd/vlasov_sd.hpp"

using namespace vmsd;
using namespace vmsd::vlasov;

namespace {
constexpr double pi = std::numbers::pi;

FieldPoint random_field(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-2, 2);
    FieldPoint f;
    for (auto& e : f.e) e = u(rng);
    for (auto& b : f.b) b = u(rng);
    return f;
}
}  // namespace

TEST(Vhat, NonRelativisticIsIdentity) {
    const std::vector<double> v{0.3, -0.7};
    EXPECT_EQ(vhat(v, false), v);
    const auto j = vhat_jacobian(v, false);
    EXPECT_EQ(j, (std::vector<double>{1, 0, 0, 1}));
}

TEST(Vhat, RelativisticBelowLightSpeedAndJacobianMatchesDifferences) {
    const std::vector<double> v{3.0, -4.0, 1.0};
    const auto w = vhat(v, true);
    const double n = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    EXPECT_NEAR(n, std::sqrt(26.0 / 27.0), 1e-15);
    const auto jac = vhat_jacobian(v, true);
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
        auto vp = v;
        auto vm = v;
        vp[static_cast<std::size_t>(j)] += h;
        vm[static_cast<std::size_t>(j)] -= h;
        const auto a = vhat(vp, true);
        const auto b = vhat(vm, true);
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(jac[static_cast<std::size_t>(i * 3 + j)], (a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]) / (2 * h), 1e-9);
            EXPECT_EQ(jac[static_cast<std::size_t>(i * 3 + j)], jac[static_cast<std::size_t>(j * 3 + i)]);
        }
    }
}

TEST(Transport, ReducedComponents) {
    TransportField g;
    g.x_scale = 0.5;
    g.field = [](double, std::span<const double>) {
        FieldPoint f;
        f.e = {1.0, 2.0, 0.0};
        f.b = {0.0, 0.0, 3.0};
        return f;
    };
    const double x[] = {0.1};
    const double v[] = {0.4, -0.2};
    const auto out = transport_eval(g, 0.0, x, v);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_DOUBLE_EQ(out[0], 0.2);              // v1 / L
    EXPECT_DOUBLE_EQ(out[1], 1.0 + (-0.2) * 3.0);  // E1 + v2 B
    EXPECT_DOUBLE_EQ(out[2], 2.0 - 0.4 * 3.0);     // E2 - v1 B
}

TEST(Transport, DivergenceIsExactlyZero) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-3, 3);
    for (bool rel : {false, true}) {
        for (auto mode : {maxwell::FieldMode::reduced1half, maxwell::FieldMode::full3d}) {
            const int dv = mode == maxwell::FieldMode::full3d ? 3 : 2;
            for (int trial = 0; trial < 200; ++trial) {
                std::vector<double> v(static_cast<std::size_t>(dv));
                for (auto& x : v) x = u(rng);
                EXPECT_EQ(transport_divergence(mode, rel, v, random_field(rng)), 0.0);
            }
        }
    }
}

TEST(Transport, DivergenceByFiniteDifferences) {
    // Independent check: central differences of the velocity part of G.
    std::mt19937 rng(12);
    const auto f = random_field(rng);
    TransportField g;
    g.mode = maxwell::FieldMode::full3d;
    g.relativistic = true;
    g.field = [f](double, std::span<const double>) { return f; };
    const double x[] = {0.0, 0.0, 0.0};
    const std::vector<double> v{0.3, -1.2, 0.8};
    const double h = 1e-5;
    double div = 0.0;
    for (int i = 0; i < 3; ++i) {
        auto vp = v;
        auto vm = v;
        vp[static_cast<std::size_t>(i)] += h;
        vm[static_cast<std::size_t>(i)] -= h;
        div += (transport_eval(g, 0.0, x, vp)[static_cast<std::size_t>(3 + i)] -
                transport_eval(g, 0.0, x, vm)[static_cast<std::size_t>(3 + i)]) / (2 * h);
    }
    EXPECT_NEAR(div, 0.0, 1e-9);
}

TEST(PhaseGrid, MomentsOfShiftedMaxwellian) {
    // f = exp(-v1^2/b - (v2 - u)^2/b) / (pi b): mass 1, K1 = b/4, K2 = (b/2 + u^2)/2.
    const double b = 0.05;
    const double u = 0.2;
    PhaseGrid g({0.0, 1.0}, 3, {-1.5, 1.5}, {-1.5, 1.5}, 30, 30, 2, false);
    const auto tr = g.phase().project_trace([&](std::span<const double> x, std::span<double> out) {
        out[0] = std::exp(-(x[1] * x[1] + (x[2] - u) * (x[2] - u)) / b) / (pi * b);
    });
    const auto m = trace_moments(g, tr);
    EXPECT_NEAR(m.mass, 1.0, 1e-4);
    EXPECT_NEAR(m.kinetic1, b / 4, 1e-5);
    EXPECT_NEAR(m.kinetic2, (b / 2 + u * u) / 2, 1e-5);
}

TEST(PhaseGrid, ReflectionIsAnInvolution) {
    PhaseGrid g({0.0, 1.0}, 3, {-1.0, 1.0}, {-1.0, 1.0}, 4, 3, 2, false);
    auto f = [](std::span<const double> x, std::span<double> out) {
        out[0] = std::sin(2 * pi * x[0]) * (1 - x[1] * x[1]) * (1 - x[2] * x[2]) * (1 + x[1] + 2 * x[2]);
    };
    const auto tr = g.phase().project_trace(f);
    const auto r = g.reflect_velocity(tr);
    const double p[] = {0.3, 0.25, -0.4};
    const double q[] = {0.3, -0.25, 0.4};
    EXPECT_NEAR(g.phase().eval_trace(r, p)[0], g.phase().eval_trace(tr, q)[0], 1e-12);
    EXPECT_EQ(g.reflect_velocity(r), tr);
    PhaseGrid skew({0.0, 1.0}, 2, {-1.0, 2.0}, {-1.0, 1.0}, 3, 2, 1, false);
    EXPECT_THROW(skew.reflect_velocity(std::vector<double>(skew.phase().trace_size())), InvalidConfig);
}

TEST(SlabSolver, CurrentOfEvenDensityVanishes) {
    PhaseGrid g({0.0, 1.0}, 4, {-1.0, 1.0}, {-1.0, 1.0}, 4, 4, 1, false);
    sd::SlabSpace fs(g.x_mesh(), 1, 3);
    SlabSolver s(g, fs, 0.1, 1.0);
    const auto tr = g.phase().project_trace([](std::span<const double> x, std::span<double> out) {
        out[0] = (1 + 0.5 * std::cos(2 * pi * x[0])) * (1 - x[1] * x[1]) * (1 - x[2] * x[2]);
    });
    std::vector<double> slab;
    for (int a = 0; a <= 1; ++a) slab.insert(slab.end(), tr.begin(), tr.end());
    for (double j : s.current(slab)) EXPECT_NEAR(j, 0.0, 1e-14);
}

TEST(SlabSolver, FreeStreamingFollowsCharacteristics) {
    const int n = 8;
    PhaseGrid g({0.0, 1.0}, n, {-1.0, 1.0}, {-1.0, 1.0}, n, n, 2, false);
    sd::SlabSpace fs(g.x_mesh(), 2, 3);
    const double k = 0.125;
    SlabSolver s(g, fs, k, 1.0);
    const auto zero = s.sample([](double, std::span<const double>) { return FieldPoint{}; }, 0.0);
    auto f0 = [](double x, double v1, double v2) {
        return std::sin(2 * pi * x) * std::pow(1 - v1 * v1, 2) * std::pow(1 - v2 * v2, 2);
    };
    const auto tr = g.phase().project_trace([&](std::span<const double> x, std::span<double> out) { out[0] = f0(x[0], x[1], x[2]); });
    const std::vector<double> delta(g.phase().mesh().cell_count(), 0.05);
    const auto st = s.solve(0, delta, tr, zero);
    const double err = std::sqrt(sd::slab_l2_error2(g.phase(), s.tables(), st.coefficients, 0.0,
                                                    [&](double t, std::span<const double> x, std::span<double> v) {
                                                        v[0] = f0(x[0] - x[1] * t, x[1], x[2]);
                                                    }));
    EXPECT_LT(err, 5e-3);
}
