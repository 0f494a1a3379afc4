#pragma once

#include <span>
#include <vector>

namespace vmsd::basis {

inline constexpr int kMaxDegree = 4;

/// Quadrature on the reference interval [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int size() const { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule; exact for polynomials of degree <= 2n - 1.
QuadratureRule gauss_rule(int n);

/// Gauss-Lobatto points of a degree-p nodal basis (p + 1 points, endpoints included).
std::vector<double> lobatto_nodes(int degree);

struct ShapeValues {
    std::vector<double> values;
    std::vector<double> derivatives;
};

/// One-dimensional nodal Lagrange basis on Gauss-Lobatto points.
class ShapeSet {
public:
    explicit ShapeSet(int degree);

    int degree() const { return degree_; }
    int size() const { return degree_ + 1; }
    const std::vector<double>& nodes() const { return nodes_; }

    ShapeValues eval(double xi) const;
    void eval(double xi, std::span<double> values, std::span<double> derivatives) const;

private:
    int degree_;
    std::vector<double> nodes_;
    std::vector<double> barycentric_;
};

/// Affine box cell: lower corner and edge lengths per direction.
struct CellGeometry {
    std::vector<double> origin;
    std::vector<double> size;
};

struct TensorValue {
    double value = 0.0;
    std::vector<double> gradient;
};

/// Evaluate the tensor-product basis function with the given per-direction
/// multi-index at a physical point inside the cell. Throws DomainError when
/// the point is outside the cell.
TensorValue tensor_eval(const CellGeometry& cell, std::span<const int> degrees,
                        std::span<const int> multi_index, std::span<const double> point);

/// Evaluate a coefficient combination sum_i c_i phi_i, the coefficients
/// enumerated lexicographically over the multi-index (first direction fastest).
TensorValue tensor_eval_combination(const CellGeometry& cell, std::span<const int> degrees,
                                    std::span<const double> coefficients,
                                    std::span<const double> point);

/// Basis values and reference derivatives of a ShapeSet tabulated at the
/// nodes of a quadrature rule: value(q, a), derivative(q, a).
struct Tabulation {
    int points = 0;
    int functions = 0;
    std::vector<double> values;
    std::vector<double> derivatives;

    double value(int q, int a) const { return values[static_cast<std::size_t>(q * functions + a)]; }
    double derivative(int q, int a) const {
        return derivatives[static_cast<std::size_t>(q * functions + a)];
    }
};

Tabulation tabulate(const ShapeSet& shapes, const QuadratureRule& rule);

}  // namespace vmsd::basis
