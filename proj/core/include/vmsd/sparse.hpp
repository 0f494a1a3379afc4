#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vmsd::sparse {

/// Row-major compressed sparse matrix with sorted, unique column indices per row.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::int64_t> row_ptr,
              std::vector<int> col_idx, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nonzeros() const { return values_.size(); }

    const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Storage offset of (row, col); -1 when the entry is not in the pattern.
    std::int64_t offset(std::size_t row, std::size_t col) const;
    double coeff(std::size_t row, std::size_t col) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;
    double quadratic_form(std::span<const double> x, std::span<const double> y) const;
    CsrMatrix transpose() const;
    double frobenius_norm() const;
    std::vector<double> to_dense() const;  // row-major, tests and small debug dumps only

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::int64_t> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

/// Triplet accumulation of a square operator and its right-hand side.
/// Duplicate (row, col) entries are summed when compressed.
class SparseSystem {
public:
    explicit SparseSystem(std::size_t n = 0) : n_(n), rhs_(n, 0.0) {}

    std::size_t size() const { return n_; }
    void accumulate(std::size_t row, std::size_t col, double value);
    void add_rhs(std::size_t row, double value);
    void reserve(std::size_t triplets);

    std::span<const double> rhs() const { return rhs_; }
    std::vector<double>& rhs() { return rhs_; }
    std::size_t triplet_count() const { return vals_.size(); }

    CsrMatrix compress() const;

private:
    std::size_t n_;
    std::vector<int> rows_;
    std::vector<int> cols_;
    std::vector<double> vals_;
    std::vector<double> rhs_;
};

enum class SolverKind { direct, iterative, automatic };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

struct SolverOptions {
    SolverKind kind = SolverKind::automatic;
    double tolerance = 1e-10;
    int max_iterations = 10000;
    int restart = 50;
    /// automatic picks the direct solver up to this many unknowns.
    std::size_t direct_limit = 2000;
};

struct SolveReport {
    SolverKind used = SolverKind::direct;
    int iterations = 0;
    double residual_ratio = 0.0;  // |Au - r| / (|A| |u| + |r|)
};

/// Solve A u = r. The result always satisfies
/// |A u - r| <= tolerance * (|A|_F |u| + |r|); otherwise SolverFailure is thrown.
std::vector<double> solve(const CsrMatrix& a, std::span<const double> rhs,
                          const SolverOptions& options = {}, std::span<const double> guess = {},
                          SolveReport* report = nullptr);
std::vector<double> solve(const SparseSystem& system, const SolverOptions& options = {});

double residual_ratio(const CsrMatrix& a, std::span<const double> u, std::span<const double> rhs);

/// Reusable sparse LU factorization of a fixed matrix.
class Factorization {
public:
    explicit Factorization(const CsrMatrix& a, double tolerance = 1e-10);
    ~Factorization();
    Factorization(Factorization&&) noexcept;
    Factorization& operator=(Factorization&&) noexcept;

    std::vector<double> solve(std::span<const double> rhs) const;
    std::size_t size() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Coordinate text dump: one "row col value" triplet per line, zero-based.
void write_coordinate(const CsrMatrix& a, std::ostream& out);

}  // namespace vmsd::sparse
