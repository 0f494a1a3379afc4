#include "vmsd/sparse.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "vmsd/errors.hpp"

namespace vmsd::sparse {

namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

RowMatrix to_eigen(const CsrMatrix& a) {
    RowMatrix m(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
    m.reserve(static_cast<Eigen::Index>(a.nonzeros()));
    std::vector<Eigen::Triplet<double, int>> trips;
    trips.reserve(a.nonzeros());
    const auto& rp = a.row_ptr();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (auto k = rp[r]; k < rp[r + 1]; ++k) {
            trips.emplace_back(static_cast<int>(r), a.col_idx()[static_cast<std::size_t>(k)],
                               a.values()[static_cast<std::size_t>(k)]);
        }
    }
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

}  // namespace

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::int64_t> row_ptr,
                     std::vector<int> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
    if (row_ptr_.size() != rows_ + 1 || col_idx_.size() != values_.size() ||
        static_cast<std::size_t>(row_ptr_.back()) != values_.size()) {
        throw AssemblyError("csr: inconsistent storage arrays");
    }
}

std::int64_t CsrMatrix::offset(std::size_t row, std::size_t col) const {
    if (row >= rows_ || col >= cols_) return -1;
    const auto first = col_idx_.begin() + row_ptr_[row];
    const auto last = col_idx_.begin() + row_ptr_[row + 1];
    const auto it = std::lower_bound(first, last, static_cast<int>(col));
    if (it == last || *it != static_cast<int>(col)) return -1;
    return it - col_idx_.begin();
}

double CsrMatrix::coeff(std::size_t row, std::size_t col) const {
    const auto k = offset(row, col);
    return k < 0 ? 0.0 : values_[static_cast<std::size_t>(k)];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_ || y.size() != rows_) throw AssemblyError("csr multiply: size mismatch");
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            s += values_[static_cast<std::size_t>(k)] *
                 x[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])];
        }
        y[r] = s;
    }
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(rows_);
    multiply(x, y);
    return y;
}

double CsrMatrix::quadratic_form(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != rows_ || y.size() != cols_) throw AssemblyError("csr quadratic form: size mismatch");
    double s = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double row = 0.0;
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            row += values_[static_cast<std::size_t>(k)] *
                   y[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])];
        }
        s += x[r] * row;
    }
    return s;
}

CsrMatrix CsrMatrix::transpose() const {
    std::vector<std::int64_t> rp(cols_ + 1, 0);
    for (int c : col_idx_) ++rp[static_cast<std::size_t>(c) + 1];
    std::partial_sum(rp.begin(), rp.end(), rp.begin());
    std::vector<int> ci(values_.size());
    std::vector<double> vv(values_.size());
    auto next = rp;
    for (std::size_t r = 0; r < rows_; ++r) {
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const auto c = static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)]);
            const auto dst = static_cast<std::size_t>(next[c]++);
            ci[dst] = static_cast<int>(r);
            vv[dst] = values_[static_cast<std::size_t>(k)];
        }
    }
    return CsrMatrix(cols_, rows_, std::move(rp), std::move(ci), std::move(vv));
}

double CsrMatrix::frobenius_norm() const { return norm2(values_); }

std::vector<double> CsrMatrix::to_dense() const {
    std::vector<double> d(rows_ * cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            d[r * cols_ + static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])] +=
                values_[static_cast<std::size_t>(k)];
        }
    }
    return d;
}

void SparseSystem::accumulate(std::size_t row, std::size_t col, double value) {
    if (row >= n_ || col >= n_) {
        throw AssemblyError("sparse system: index (" + std::to_string(row) + ", " +
                            std::to_string(col) + ") out of range for size " + std::to_string(n_));
    }
    rows_.push_back(static_cast<int>(row));
    cols_.push_back(static_cast<int>(col));
    vals_.push_back(value);
}

void SparseSystem::add_rhs(std::size_t row, double value) {
    if (row >= n_) throw AssemblyError("sparse system: rhs index out of range");
    rhs_[row] += value;
}

void SparseSystem::reserve(std::size_t triplets) {
    rows_.reserve(triplets);
    cols_.reserve(triplets);
    vals_.reserve(triplets);
}

CsrMatrix SparseSystem::compress() const {
    // Counting sort by row, then sort each row by column and merge duplicates.
    std::vector<std::int64_t> count(n_ + 1, 0);
    for (int r : rows_) ++count[static_cast<std::size_t>(r) + 1];
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<std::size_t> order(vals_.size());
    auto next = count;
    for (std::size_t k = 0; k < vals_.size(); ++k) {
        order[static_cast<std::size_t>(next[static_cast<std::size_t>(rows_[k])]++)] = k;
    }
    std::vector<std::int64_t> rp(n_ + 1, 0);
    std::vector<int> ci;
    std::vector<double> vv;
    ci.reserve(vals_.size());
    vv.reserve(vals_.size());
    for (std::size_t r = 0; r < n_; ++r) {
        const auto b = order.begin() + count[r];
        const auto e = order.begin() + count[r + 1];
        std::stable_sort(b, e, [&](std::size_t x, std::size_t y) { return cols_[x] < cols_[y]; });
        for (auto it = b; it != e; ++it) {
            if (!ci.empty() && static_cast<std::int64_t>(ci.size()) > rp[r] && ci.back() == cols_[*it]) {
                vv.back() += vals_[*it];
            } else {
                ci.push_back(cols_[*it]);
                vv.push_back(vals_[*it]);
            }
        }
        rp[r + 1] = static_cast<std::int64_t>(ci.size());
    }
    return CsrMatrix(n_, n_, std::move(rp), std::move(ci), std::move(vv));
}

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::direct: return "direct";
        case SolverKind::iterative: return "iterative";
        case SolverKind::automatic: return "auto";
    }
    return "auto";
}

SolverKind solver_kind_from_string(const std::string& name) {
    if (name == "direct") return SolverKind::direct;
    if (name == "iterative") return SolverKind::iterative;
    if (name == "auto") return SolverKind::automatic;
    throw InvalidConfig("unknown solver kind '" + name + "' (expected direct, iterative or auto)");
}

double residual_ratio(const CsrMatrix& a, std::span<const double> u, std::span<const double> rhs) {
    auto r = a.multiply(u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= rhs[i];
    const double denom = a.frobenius_norm() * norm2(u) + norm2(rhs);
    const double num = norm2(r);
    if (denom == 0.0) return num == 0.0 ? 0.0 : INFINITY;
    return num / denom;
}

struct Factorization::Impl {
    ColMatrix matrix;
    Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
    CsrMatrix original;
    double tolerance = 1e-10;
};

Factorization::Factorization(const CsrMatrix& a, double tolerance) : impl_(std::make_unique<Impl>()) {
    if (a.rows() != a.cols()) throw AssemblyError("factorization: matrix must be square");
    impl_->original = a;
    impl_->tolerance = tolerance;
    impl_->matrix = ColMatrix(to_eigen(a));
    impl_->matrix.makeCompressed();
    impl_->lu.analyzePattern(impl_->matrix);
    impl_->lu.factorize(impl_->matrix);
    if (impl_->lu.info() != Eigen::Success) {
        throw SolverFailure("sparse LU factorization failed: " + impl_->lu.lastErrorMessage(), INFINITY);
    }
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

std::size_t Factorization::size() const { return impl_->original.rows(); }

std::vector<double> Factorization::solve(std::span<const double> rhs) const {
    if (rhs.size() != size()) throw AssemblyError("factorization solve: rhs size mismatch");
    const Eigen::Map<const Vec> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Vec x = impl_->lu.solve(b);
    std::vector<double> u(x.data(), x.data() + x.size());
    const double ratio = residual_ratio(impl_->original, u, rhs);
    if (!(ratio <= impl_->tolerance)) {
        throw SolverFailure("direct solve residual above tolerance", ratio);
    }
    return u;
}

std::vector<double> solve(const CsrMatrix& a, std::span<const double> rhs, const SolverOptions& options,
                          std::span<const double> guess, SolveReport* report) {
    if (a.rows() != a.cols() || rhs.size() != a.rows()) {
        throw AssemblyError("solve: matrix must be square and match the rhs");
    }
    const std::size_t n = a.rows();
    SolverKind kind = options.kind;
    if (kind == SolverKind::automatic) {
        kind = n <= options.direct_limit ? SolverKind::direct : SolverKind::iterative;
    }
    SolveReport local;
    if (kind == SolverKind::iterative) {
        const RowMatrix m = to_eigen(a);
        Eigen::GMRES<RowMatrix, Eigen::DiagonalPreconditioner<double>> gmres;
        gmres.set_restart(options.restart);
        gmres.setMaxIterations(options.max_iterations);
        gmres.compute(m);
        const Eigen::Map<const Vec> b(rhs.data(), static_cast<Eigen::Index>(n));
        // Krylov on the correction: Eigen's GMRES does not stop when started
        // from an already converged guess, so the guess is folded into the rhs.
        Vec x = Vec::Zero(static_cast<Eigen::Index>(n));
        Vec r = b;
        if (guess.size() == n) {
            x = Eigen::Map<const Vec>(guess.data(), static_cast<Eigen::Index>(n));
            r = b - m * x;
        }
        const double bn = b.norm();
        if (bn == 0.0) {
            x.setZero();
            r.setZero();
        }
        const double rn = r.norm();
        if (rn > 0.1 * options.tolerance * bn) {
            gmres.setTolerance(std::min(0.5, 0.1 * options.tolerance * bn / rn));
            x += gmres.solve(r);
            local.iterations = static_cast<int>(gmres.iterations());
        }
        std::vector<double> u(x.data(), x.data() + x.size());
        local.used = SolverKind::iterative;
        local.residual_ratio = residual_ratio(a, u, rhs);
        if (local.residual_ratio <= options.tolerance) {
            if (report) *report = local;
            return u;
        }
        // Fall through to the direct solver when the Krylov iteration stalls.
    }
    Factorization lu(a, options.tolerance);
    auto u = lu.solve(rhs);
    local.used = SolverKind::direct;
    local.residual_ratio = residual_ratio(a, u, rhs);
    if (report) *report = local;
    return u;
}

std::vector<double> solve(const SparseSystem& system, const SolverOptions& options) {
    return solve(system.compress(), system.rhs(), options);
}

void write_coordinate(const CsrMatrix& a, std::ostream& out) {
    const auto old = out.precision(17);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (auto k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
            out << r << ' ' << a.col_idx()[static_cast<std::size_t>(k)] << ' '
                << a.values()[static_cast<std::size_t>(k)] << '\n';
        }
    }
    out.precision(old);
}

}  // namespace vmsd::sparse
