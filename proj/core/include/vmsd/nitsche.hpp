#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "vmsd/sparse.hpp"

namespace vmsd::nitsche {

/// Penalty gamma, uniform cells per direction on the unit box, dimension (2 or 3).
struct Params {
    double gamma = 10.0;
    int cells = 8;
    int dim = 2;
    int quadrature = 3;  // Gauss points per direction
};

/// Continuous piecewise (multi)linear vector fields on the unit square or
/// cube. Boundary nodes are kept: boundary values are imposed weakly.
class Space {
public:
    explicit Space(const Params& params);

    int dim() const { return params_.dim; }
    int cells() const { return params_.cells; }
    double h() const { return 1.0 / params_.cells; }
    const Params& params() const { return params_; }
    /// Curl components: 1 in the plane, 3 in space.
    int curl_size() const { return params_.dim == 2 ? 1 : 3; }

    std::size_t nodes() const { return nodes_; }
    std::size_t size() const { return nodes_ * static_cast<std::size_t>(params_.dim); }
    std::size_t dof(std::size_t node, int component) const {
        return node * static_cast<std::size_t>(params_.dim) + static_cast<std::size_t>(component);
    }
    std::vector<double> node_point(std::size_t node) const;
    /// Node ids of a cell's 2^dim vertices, first direction fastest.
    std::vector<std::size_t> cell_nodes(std::size_t cell) const;
    std::size_t cell_count() const;
    std::vector<double> cell_origin(std::size_t cell) const;

    /// Nodal interpolant of a pointwise vector field.
    std::vector<double> interpolate(const std::function<void(std::span<const double>, std::span<double>)>& u) const;

private:
    Params params_;
    std::size_t nodes_;
};

/// Pointwise field: values (dim entries) followed by its curl (curl_size entries).
using ExactField = std::function<void(std::span<const double> x, std::span<double> value_and_curl)>;

/// Assembled matrices of one mesh:
///   mass      (u, v)
///   form      a(u, v) = (curl u, curl v) + <curl u, v x n> + <u x n, curl v> + gamma/h <u, v>
///   norm_h    |u|_h^2 = |curl u|^2 + h^-1 |u|_G^2
///   triple_h  norm_h + h |curl u|_G^2
struct Operators {
    sparse::CsrMatrix mass;
    sparse::CsrMatrix form;
    sparse::CsrMatrix norm_h;
    sparse::CsrMatrix triple_h;
};

Operators assemble(const Space& space);

double form_value(const Operators& ops, std::span<const double> u, std::span<const double> v);
double discrete_norm_h(const Operators& ops, std::span<const double> u);
double triple_norm_h(const Operators& ops, std::span<const double> u);

/// a(u, phi_i) for an exact field u and every basis function.
std::vector<double> form_load(const Space& space, const ExactField& u);
/// (f, phi_i) for a pointwise vector function f (dim entries).
std::vector<double> load(const Space& space, const std::function<void(std::span<const double>, std::span<double>)>& f);

/// Modified Ritz projection: a(Q_h u, v) = a(u, v) for all discrete v.
std::vector<double> ritz_project(const Space& space, const Operators& ops, const ExactField& u);

/// Errors of a discrete field against an exact one.
struct FieldErrors {
    double l2 = 0.0;
    double h_norm = 0.0;
    double triple = 0.0;
};

FieldErrors errors(const Space& space, std::span<const double> uh, const ExactField& u);

/// Smallest a(g, g) / |g|_h^2 over discrete g outside the common kernel
/// (curl-free fields vanishing on the boundary), by dense eigen-decomposition.
double coercivity_constant(const Operators& ops);

/// Three-level scheme
///   (E^m - 2E^{m-1} + E^{m-2}) / k^2 + a((E^m + 2E^{m-1} + E^{m-2}) / 4) = -(j_t^{m-1}, .)
/// with (M/k^2 + A/4) factorized once.
class TimeStepper {
public:
    TimeStepper(const Operators& ops, double k, double tolerance = 1e-10);
    ~TimeStepper();

    double step_size() const { return k_; }
    /// load = (j_t(t_{m-1}), phi_i).
    std::vector<double> step(std::span<const double> prev2, std::span<const double> prev1,
                             std::span<const double> load) const;

private:
    const Operators* ops_;
    double k_;
    std::unique_ptr<sparse::Factorization> lu_;
};

/// E^0 = Q_h E(0), E^1 = Q_h(E(0) + k E_t(0) + k^2/2 E_tt(0) [+ k^3/6 E_ttt(0)]).
/// derivatives[i] is the i-th time derivative at t = 0 (2 to 4 entries).
std::pair<std::vector<double>, std::vector<double>> startup(const Space& space, const Operators& ops,
                                                            const std::vector<ExactField>& derivatives, double k);

/// E^m = |(theta^m - theta^{m-1}) / k|^2 + a(theta^m + theta^{m-1}, theta^m + theta^{m-1}) / 4.
double discrete_energy(const Operators& ops, std::span<const double> theta_m, std::span<const double> theta_m1,
                       double k);

}  // namespace vmsd::nitsche
