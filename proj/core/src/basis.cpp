#include "vmsd/basis.hpp"

#include <cmath>
#include <numbers>

#include "vmsd/errors.hpp"

namespace vmsd::basis {

namespace {

// Legendre polynomial P_n and its derivative via the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
    double p0 = 1.0;
    double p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

QuadratureRule gauss_rule(int n) {
    if (n < 1) throw InvalidConfig("gauss_rule: point count must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double p = 0.0;
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            legendre(n, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        legendre(n, x, p, dp);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

std::vector<double> lobatto_nodes(int degree) {
    if (degree < 1 || degree > kMaxDegree) {
        throw InvalidConfig("lobatto_nodes: degree must be in [1, " + std::to_string(kMaxDegree) + "]");
    }
    // Interior nodes are the roots of P'_p, found by Newton from Chebyshev-Lobatto guesses.
    std::vector<double> nodes(static_cast<std::size_t>(degree) + 1);
    nodes.front() = -1.0;
    nodes.back() = 1.0;
    for (int i = 1; i < degree; ++i) {
        double x = -std::cos(std::numbers::pi * i / degree);
        for (int it = 0; it < 100; ++it) {
            // q = P'_p, dq = P''_p from the Legendre ODE.
            double p = 0.0;
            double dp = 0.0;
            legendre(degree, x, p, dp);
            const double d2p = (2.0 * x * dp - degree * (degree + 1.0) * p) / (1.0 - x * x);
            const double dx = dp / d2p;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[static_cast<std::size_t>(i)] = x;
    }
    if (degree % 2 == 0) nodes[static_cast<std::size_t>(degree / 2)] = 0.0;
    return nodes;
}

ShapeSet::ShapeSet(int degree) : degree_(degree), nodes_(lobatto_nodes(degree)) {
    barycentric_.assign(nodes_.size(), 1.0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            if (i != j) barycentric_[i] /= (nodes_[i] - nodes_[j]);
        }
    }
}

ShapeValues ShapeSet::eval(double xi) const {
    ShapeValues out;
    out.values.resize(static_cast<std::size_t>(size()));
    out.derivatives.resize(static_cast<std::size_t>(size()));
    eval(xi, out.values, out.derivatives);
    return out;
}

void ShapeSet::eval(double xi, std::span<double> values, std::span<double> derivatives) const {
    // Product form: phi_i = w_i prod_{j != i} (xi - x_j); phi_i' by the product rule.
    const std::size_t n = nodes_.size();
    for (std::size_t i = 0; i < n; ++i) {
        double v = barycentric_[i];
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double f = xi - nodes_[j];
            d = d * f + v;
            v *= f;
        }
        values[i] = v;
        derivatives[i] = d;
    }
}

namespace {

struct ReferencePoint {
    std::vector<double> xi;
    std::vector<double> jacobian;  // d xi / d x per direction
};

ReferencePoint to_reference(const CellGeometry& cell, std::span<const double> point) {
    const std::size_t dim = cell.origin.size();
    if (point.size() != dim || cell.size.size() != dim) {
        throw DomainError("tensor_eval: dimension mismatch");
    }
    ReferencePoint ref;
    ref.xi.resize(dim);
    ref.jacobian.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        const double s = (point[d] - cell.origin[d]) / cell.size[d];
        if (s < -1e-12 || s > 1.0 + 1e-12) {
            throw DomainError("tensor_eval: point outside cell in direction " + std::to_string(d));
        }
        ref.xi[d] = 2.0 * s - 1.0;
        ref.jacobian[d] = 2.0 / cell.size[d];
    }
    return ref;
}

}  // namespace

TensorValue tensor_eval(const CellGeometry& cell, std::span<const int> degrees,
                        std::span<const int> multi_index, std::span<const double> point) {
    const auto ref = to_reference(cell, point);
    const std::size_t dim = ref.xi.size();
    if (degrees.size() != dim || multi_index.size() != dim) {
        throw DomainError("tensor_eval: degree/multi-index dimension mismatch");
    }
    std::vector<double> val(dim);
    std::vector<double> der(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        const ShapeSet shapes(degrees[d]);
        const auto sv = shapes.eval(ref.xi[d]);
        const auto a = static_cast<std::size_t>(multi_index[d]);
        if (a >= sv.values.size()) throw DomainError("tensor_eval: multi-index out of range");
        val[d] = sv.values[a];
        der[d] = sv.derivatives[a] * ref.jacobian[d];
    }
    TensorValue out;
    out.value = 1.0;
    for (double v : val) out.value *= v;
    out.gradient.assign(dim, 1.0);
    for (std::size_t g = 0; g < dim; ++g) {
        for (std::size_t d = 0; d < dim; ++d) out.gradient[g] *= (d == g ? der[d] : val[d]);
    }
    return out;
}

TensorValue tensor_eval_combination(const CellGeometry& cell, std::span<const int> degrees,
                                    std::span<const double> coefficients,
                                    std::span<const double> point) {
    const std::size_t dim = degrees.size();
    std::size_t count = 1;
    for (int p : degrees) count *= static_cast<std::size_t>(p + 1);
    if (coefficients.size() != count) throw DomainError("tensor_eval: coefficient count mismatch");
    TensorValue out;
    out.gradient.assign(dim, 0.0);
    std::vector<int> mi(dim, 0);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t rest = i;
        for (std::size_t d = 0; d < dim; ++d) {
            mi[d] = static_cast<int>(rest % static_cast<std::size_t>(degrees[d] + 1));
            rest /= static_cast<std::size_t>(degrees[d] + 1);
        }
        const auto tv = tensor_eval(cell, degrees, mi, point);
        out.value += coefficients[i] * tv.value;
        for (std::size_t d = 0; d < dim; ++d) out.gradient[d] += coefficients[i] * tv.gradient[d];
    }
    return out;
}

Tabulation tabulate(const ShapeSet& shapes, const QuadratureRule& rule) {
    Tabulation t;
    t.points = rule.size();
    t.functions = shapes.size();
    t.values.resize(static_cast<std::size_t>(t.points * t.functions));
    t.derivatives.resize(t.values.size());
    for (int q = 0; q < t.points; ++q) {
        const auto off = static_cast<std::size_t>(q * t.functions);
        shapes.eval(rule.nodes[static_cast<std::size_t>(q)],
                    std::span<double>(t.values).subspan(off, static_cast<std::size_t>(t.functions)),
                    std::span<double>(t.derivatives).subspan(off, static_cast<std::size_t>(t.functions)));
    }
    return t;
}

}  // namespace vmsd::basis
