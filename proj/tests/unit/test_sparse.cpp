#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "vmsd/errors.hpp"
#include "vmsd/sparse.hpp"

using namespace vmsd;
using namespace vmsd::sparse;

namespace {

// 1D Laplacian-like nonsymmetric tridiagonal system of size n.
CsrMatrix tridiagonal(std::size_t n) {
    SparseSystem s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.accumulate(i, i, 4.0);
        if (i > 0) s.accumulate(i, i - 1, -1.0);
        if (i + 1 < n) s.accumulate(i, i + 1, -1.5);
    }
    return s.compress();
}

}  // namespace

TEST(Csr, DuplicatesAreSummedAndSorted) {
    SparseSystem s(3);
    s.accumulate(0, 2, 1.0);
    s.accumulate(0, 0, 2.0);
    s.accumulate(0, 2, 0.5);
    s.accumulate(2, 1, -1.0);
    const auto a = s.compress();
    EXPECT_EQ(a.nonzeros(), 3u);
    EXPECT_EQ(a.col_idx()[0], 0);
    EXPECT_EQ(a.col_idx()[1], 2);
    EXPECT_DOUBLE_EQ(a.coeff(0, 2), 1.5);
    EXPECT_DOUBLE_EQ(a.coeff(1, 1), 0.0);
    EXPECT_EQ(a.offset(1, 1), -1);
}

TEST(Csr, MultiplyTransposeQuadraticForm) {
    SparseSystem s(2);
    s.accumulate(0, 0, 1.0);
    s.accumulate(0, 1, 2.0);
    s.accumulate(1, 0, 3.0);
    s.accumulate(1, 1, 4.0);
    const auto a = s.compress();
    const std::vector<double> x{1.0, -1.0};
    EXPECT_EQ(a.multiply(x), (std::vector<double>{-1.0, -1.0}));
    const auto t = a.transpose();
    EXPECT_DOUBLE_EQ(t.coeff(0, 1), 3.0);
    const std::vector<double> y{2.0, 1.0};
    // x^T A y = [1 -1] [[1 2][3 4]] [2 1]^T = 4 - 10
    EXPECT_DOUBLE_EQ(a.quadratic_form(x, y), -6.0);
    EXPECT_DOUBLE_EQ(a.frobenius_norm(), std::sqrt(30.0));
    EXPECT_EQ(a.to_dense(), (std::vector<double>{1, 2, 3, 4}));
}

TEST(Csr, RejectsOutOfRange) {
    SparseSystem s(2);
    EXPECT_THROW(s.accumulate(2, 0, 1.0), AssemblyError);
    EXPECT_THROW(s.add_rhs(5, 1.0), AssemblyError);
}

TEST(Solve, HandComputedSystem) {
    // [[2 1][1 3]] u = [3 5] -> u = [0.8 1.4]
    SparseSystem s(2);
    s.accumulate(0, 0, 2.0);
    s.accumulate(0, 1, 1.0);
    s.accumulate(1, 0, 1.0);
    s.accumulate(1, 1, 3.0);
    s.add_rhs(0, 3.0);
    s.add_rhs(1, 5.0);
    for (auto kind : {SolverKind::direct, SolverKind::iterative, SolverKind::automatic}) {
        SolverOptions o;
        o.kind = kind;
        const auto u = solve(s, o);
        EXPECT_NEAR(u[0], 0.8, 1e-10);
        EXPECT_NEAR(u[1], 1.4, 1e-10);
    }
}

TEST(Solve, IterativeAgreesWithDirectAndUsesGuess) {
    const auto a = tridiagonal(500);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> r(500);
    for (auto& v : r) v = u(rng);
    SolverOptions d;
    d.kind = SolverKind::direct;
    SolverOptions it;
    it.kind = SolverKind::iterative;
    const auto x1 = solve(a, r, d);
    SolveReport rep;
    const auto x2 = solve(a, r, it, {}, &rep);
    EXPECT_EQ(rep.used, SolverKind::iterative);
    for (std::size_t i = 0; i < x1.size(); ++i) EXPECT_NEAR(x1[i], x2[i], 1e-8);
    EXPECT_LE(residual_ratio(a, x2, r), 1e-10);
    // An exact guess needs no iterations.
    SolveReport rep2;
    solve(a, r, it, x1, &rep2);
    EXPECT_EQ(rep2.iterations, 0);
}

TEST(Solve, AutomaticSwitchesOnSize) {
    const auto a = tridiagonal(50);
    std::vector<double> r(50, 1.0);
    SolverOptions o;
    o.direct_limit = 10;
    SolveReport rep;
    solve(a, r, o, {}, &rep);
    EXPECT_EQ(rep.used, SolverKind::iterative);
    o.direct_limit = 100;
    solve(a, r, o, {}, &rep);
    EXPECT_EQ(rep.used, SolverKind::direct);
}

TEST(Solve, ZeroRhsGivesZero) {
    const auto a = tridiagonal(10);
    const auto x = solve(a, std::vector<double>(10, 0.0));
    for (double v : x) EXPECT_EQ(v, 0.0);
}

TEST(Solve, SingularMatrixFails) {
    SparseSystem s(2);
    s.accumulate(0, 0, 1.0);
    s.accumulate(0, 1, 1.0);
    s.accumulate(1, 0, 1.0);
    s.accumulate(1, 1, 1.0);
    SolverOptions o;
    o.kind = SolverKind::direct;
    EXPECT_THROW(solve(s.compress(), std::vector<double>{1.0, 0.0}, o), SolverFailure);
}

TEST(Factorization, ReusedAcrossRightHandSides) {
    const auto a = tridiagonal(30);
    Factorization f(a);
    EXPECT_EQ(f.size(), 30u);
    for (int k = 0; k < 3; ++k) {
        std::vector<double> r(30, 0.0);
        r[static_cast<std::size_t>(k)] = 1.0;
        const auto x = f.solve(r);
        EXPECT_LE(residual_ratio(a, x, r), 1e-12);
    }
    EXPECT_THROW(f.solve(std::vector<double>(3, 0.0)), AssemblyError);
}

TEST(SolverKindNames, RoundTrip) {
    for (auto k : {SolverKind::direct, SolverKind::iterative, SolverKind::automatic}) {
        EXPECT_EQ(solver_kind_from_string(to_string(k)), k);
    }
    EXPECT_THROW(solver_kind_from_string("cg"), InvalidConfig);
}

TEST(Coordinate, OneTripletPerLine) {
    SparseSystem s(2);
    s.accumulate(1, 0, 2.5);
    std::ostringstream out;
    write_coordinate(s.compress(), out);
    EXPECT_EQ(out.str(), "1 0 2.5\n");
}
