#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "vmsd/basis.hpp"
#include "vmsd/errors.hpp"

using namespace vmsd::basis;

// Exact integral of x^k over [-1, 1].
static double monomial_integral(int k) { return k % 2 ? 0.0 : 2.0 / (k + 1); }

TEST(Gauss, ExactUpToDegree2nMinus1) {
    for (int n = 1; n <= 8; ++n) {
        const auto r = gauss_rule(n);
        ASSERT_EQ(r.size(), n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
            EXPECT_NEAR(s, monomial_integral(k), 1e-14) << "n=" << n << " k=" << k;
        }
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], 2 * n);
        EXPECT_GT(std::abs(s - monomial_integral(2 * n)), 1e-6) << "n=" << n;
    }
}

TEST(Gauss, TwoPointNodes) {
    const auto r = gauss_rule(2);
    EXPECT_NEAR(r.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(r.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(r.weights[0], 1.0, 1e-15);
}

TEST(Lobatto, KnownNodes) {
    EXPECT_EQ(lobatto_nodes(1), (std::vector<double>{-1.0, 1.0}));
    const auto p2 = lobatto_nodes(2);
    EXPECT_NEAR(p2[1], 0.0, 1e-15);
    const auto p3 = lobatto_nodes(3);
    EXPECT_NEAR(p3[2], 1.0 / std::sqrt(5.0), 1e-14);
    const auto p4 = lobatto_nodes(4);
    EXPECT_NEAR(p4[3], std::sqrt(3.0 / 7.0), 1e-14);
}

TEST(ShapeSet, KroneckerPartitionOfUnityAndDerivatives) {
    for (int p = 1; p <= kMaxDegree; ++p) {
        ShapeSet s(p);
        for (int i = 0; i <= p; ++i) {
            const auto v = s.eval(s.nodes()[i]);
            for (int j = 0; j <= p; ++j) EXPECT_NEAR(v.values[j], i == j ? 1.0 : 0.0, 1e-13);
        }
        for (double xi : {-0.9, -0.2, 0.37, 0.8}) {
            const auto v = s.eval(xi);
            EXPECT_NEAR(std::accumulate(v.values.begin(), v.values.end(), 0.0), 1.0, 1e-13);
            EXPECT_NEAR(std::accumulate(v.derivatives.begin(), v.derivatives.end(), 0.0), 0.0, 1e-12);
            // Interpolating xi^p is exact, so its derivative is reproduced.
            double d = 0.0;
            for (int j = 0; j <= p; ++j) d += std::pow(s.nodes()[j], p) * v.derivatives[j];
            EXPECT_NEAR(d, p * std::pow(xi, p - 1), 1e-12);
        }
    }
}

TEST(ShapeSet, RejectsBadDegree) {
    EXPECT_THROW(ShapeSet(0), vmsd::InvalidConfig);
    EXPECT_THROW(ShapeSet(kMaxDegree + 1), vmsd::InvalidConfig);
}

TEST(TensorEval, BilinearCornerFunction) {
    CellGeometry cell{{1.0, 2.0}, {0.5, 2.0}};
    const int deg[] = {1, 1};
    const int idx[] = {1, 0};  // upper in x, lower in y
    const double pt[] = {1.25, 2.5};
    const auto v = tensor_eval(cell, deg, idx, pt);
    // (x - 1)/0.5 * (1 - (y - 2)/2) = 0.5 * 0.75
    EXPECT_NEAR(v.value, 0.375, 1e-15);
    EXPECT_NEAR(v.gradient[0], 0.75 / 0.5, 1e-14);
    EXPECT_NEAR(v.gradient[1], -0.5 / 2.0, 1e-14);
    const double outside[] = {2.0, 2.5};
    EXPECT_THROW(tensor_eval(cell, deg, idx, outside), vmsd::DomainError);
}

TEST(TensorEval, CombinationReproducesLinearFunction) {
    CellGeometry cell{{0.0, 0.0}, {1.0, 1.0}};
    const int deg[] = {2, 1};
    // f = 3x + 2y - 1 at nodes x in {0, .5, 1}, y in {0, 1}, x fastest
    std::vector<double> c;
    for (double y : {0.0, 1.0})
        for (double x : {0.0, 0.5, 1.0}) c.push_back(3 * x + 2 * y - 1);
    const double pt[] = {0.3, 0.7};
    const auto v = tensor_eval_combination(cell, deg, c, pt);
    EXPECT_NEAR(v.value, 3 * 0.3 + 2 * 0.7 - 1, 1e-14);
    EXPECT_NEAR(v.gradient[0], 3.0, 1e-13);
    EXPECT_NEAR(v.gradient[1], 2.0, 1e-13);
}

TEST(Tabulation, MatchesPointwiseEvaluation) {
    ShapeSet s(3);
    const auto r = gauss_rule(5);
    const auto t = tabulate(s, r);
    ASSERT_EQ(t.points, 5);
    ASSERT_EQ(t.functions, 4);
    for (int q = 0; q < 5; ++q) {
        const auto v = s.eval(r.nodes[q]);
        for (int a = 0; a < 4; ++a) {
            EXPECT_DOUBLE_EQ(t.value(q, a), v.values[a]);
            EXPECT_DOUBLE_EQ(t.derivative(q, a), v.derivatives[a]);
        }
    }
}
