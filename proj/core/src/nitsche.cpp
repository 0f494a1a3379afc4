#include "vmsd/nitsche.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "vmsd/basis.hpp"
#include "vmsd/errors.hpp"

namespace vmsd::nitsche {

namespace {

int ipow2(int d) { return 1 << d; }

std::size_t upow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// curl of a (value, gradient) pair times unit vector e_c, as curl_size entries.
void basis_curl(int dim, int c, std::span<const double> grad, std::span<double> out) {
    if (dim == 2) {
        // curl(u) = d1 u2 - d2 u1
        out[0] = c == 1 ? grad[0] : -grad[1];
        return;
    }
    // curl(psi e_c) = grad psi x e_c
    const int a = (c + 1) % 3;
    const int b = (c + 2) % 3;
    out[static_cast<std::size_t>(c)] = 0.0;
    out[static_cast<std::size_t>(a)] = -grad[static_cast<std::size_t>(b)];
    out[static_cast<std::size_t>(b)] = grad[static_cast<std::size_t>(a)];
}

// u x n for u = psi e_c.
void basis_cross_n(int dim, int c, double psi, std::span<const double> n, std::span<double> out) {
    if (dim == 2) {
        // u x n = u1 n2 - u2 n1
        out[0] = c == 0 ? psi * n[1] : -psi * n[0];
        return;
    }
    const int a = (c + 1) % 3;
    const int b = (c + 2) % 3;
    out[static_cast<std::size_t>(c)] = 0.0;
    out[static_cast<std::size_t>(a)] = psi * n[static_cast<std::size_t>(b)];
    out[static_cast<std::size_t>(b)] = -psi * n[static_cast<std::size_t>(a)];
}

void field_cross_n(int dim, std::span<const double> u, std::span<const double> n, std::span<double> out) {
    if (dim == 2) {
        out[0] = u[0] * n[1] - u[1] * n[0];
        return;
    }
    out[0] = u[1] * n[2] - u[2] * n[1];
    out[1] = u[2] * n[0] - u[0] * n[2];
    out[2] = u[0] * n[1] - u[1] * n[0];
}

// Values, gradients, curls and boundary data of all local vector basis
// functions at one point of a cell.
struct LocalBasis {
    int dim;
    int nloc;  // 2^dim * dim
    int ncurl;
    std::vector<double> value;  // nloc * dim
    std::vector<double> curl;   // nloc * ncurl
    std::vector<double> psi;    // 2^dim scalar values
    std::vector<double> grad;   // 2^dim * dim

    explicit LocalBasis(int d)
        : dim(d), nloc(ipow2(d) * d), ncurl(d == 2 ? 1 : 3),
          value(static_cast<std::size_t>(nloc * d)), curl(static_cast<std::size_t>(nloc * ncurl)),
          psi(static_cast<std::size_t>(ipow2(d))), grad(static_cast<std::size_t>(ipow2(d) * d)) {}

    // xi in [0,1]^dim local coordinates, h cell size.
    void eval(std::span<const double> xi, double h) {
        const int nv = ipow2(dim);
        for (int a = 0; a < nv; ++a) {
            double v = 1.0;
            for (int d = 0; d < dim; ++d) v *= ((a >> d) & 1) ? xi[static_cast<std::size_t>(d)] : 1.0 - xi[static_cast<std::size_t>(d)];
            psi[static_cast<std::size_t>(a)] = v;
            for (int g = 0; g < dim; ++g) {
                double p = 1.0;
                for (int d = 0; d < dim; ++d) {
                    const bool hi = (a >> d) & 1;
                    const double x = xi[static_cast<std::size_t>(d)];
                    p *= d == g ? (hi ? 1.0 : -1.0) / h : (hi ? x : 1.0 - x);
                }
                grad[static_cast<std::size_t>(a * dim + g)] = p;
            }
        }
        std::fill(value.begin(), value.end(), 0.0);
        for (int a = 0; a < nv; ++a) {
            for (int c = 0; c < dim; ++c) {
                const int l = a * dim + c;
                value[static_cast<std::size_t>(l * dim + c)] = psi[static_cast<std::size_t>(a)];
                basis_curl(dim, c, std::span<const double>(grad).subspan(static_cast<std::size_t>(a * dim), static_cast<std::size_t>(dim)),
                           std::span<double>(curl).subspan(static_cast<std::size_t>(l * ncurl), static_cast<std::size_t>(ncurl)));
            }
        }
    }
};

struct BoundaryFace {
    std::size_t cell;
    int direction;
    int side;
};

std::vector<BoundaryFace> boundary_faces(const Space& space) {
    std::vector<BoundaryFace> out;
    const int n = space.cells();
    for (std::size_t cell = 0; cell < space.cell_count(); ++cell) {
        std::size_t rest = cell;
        for (int d = 0; d < space.dim(); ++d) {
            const int i = static_cast<int>(rest % static_cast<std::size_t>(n));
            rest /= static_cast<std::size_t>(n);
            if (i == 0) out.push_back({cell, d, 0});
            if (i == n - 1) out.push_back({cell, d, 1});
        }
    }
    return out;
}

// Tensor Gauss points on [0,1]^k with weights scaled by h^k.
struct UnitRule {
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
};

UnitRule unit_rule(int k, int n, double h) {
    const auto g = basis::gauss_rule(n);
    UnitRule r;
    const std::size_t total = upow(static_cast<std::size_t>(n), k);
    for (std::size_t q = 0; q < total; ++q) {
        std::vector<double> p(static_cast<std::size_t>(k));
        double w = 1.0;
        std::size_t rest = q;
        for (int d = 0; d < k; ++d) {
            const auto i = rest % static_cast<std::size_t>(n);
            rest /= static_cast<std::size_t>(n);
            p[static_cast<std::size_t>(d)] = 0.5 * (g.nodes[i] + 1.0);
            w *= 0.5 * g.weights[i] * h;
        }
        r.points.push_back(std::move(p));
        r.weights.push_back(w);
    }
    return r;
}

// Face point in cell-local coordinates plus outward normal.
void face_point(const BoundaryFace& f, int dim, std::span<const double> t, std::span<double> xi, std::span<double> normal) {
    int k = 0;
    for (int d = 0; d < dim; ++d) {
        normal[static_cast<std::size_t>(d)] = 0.0;
        if (d == f.direction) {
            xi[static_cast<std::size_t>(d)] = f.side;
        } else {
            xi[static_cast<std::size_t>(d)] = t[static_cast<std::size_t>(k++)];
        }
    }
    normal[static_cast<std::size_t>(f.direction)] = f.side ? 1.0 : -1.0;
}

std::vector<std::size_t> local_dofs(const Space& space, std::size_t cell) {
    const auto nodes = space.cell_nodes(cell);
    std::vector<std::size_t> dofs;
    for (auto n : nodes) {
        for (int c = 0; c < space.dim(); ++c) dofs.push_back(space.dof(n, c));
    }
    return dofs;
}

}  // namespace

Space::Space(const Params& params) : params_(params) {
    if (params.dim != 2 && params.dim != 3) throw InvalidConfig("nitsche: dimension must be 2 or 3");
    if (params.cells < 1) throw InvalidConfig("nitsche: cells must be >= 1");
    if (!(params.gamma > 0.0)) throw InvalidConfig("nitsche: gamma must be positive");
    if (params.quadrature < 2) throw InvalidConfig("nitsche: quadrature must use at least 2 points");
    nodes_ = upow(static_cast<std::size_t>(params.cells + 1), params.dim);
}

std::size_t Space::cell_count() const { return upow(static_cast<std::size_t>(params_.cells), params_.dim); }

std::vector<double> Space::node_point(std::size_t node) const {
    std::vector<double> x(static_cast<std::size_t>(params_.dim));
    for (auto& v : x) {
        v = static_cast<double>(node % static_cast<std::size_t>(params_.cells + 1)) * h();
        node /= static_cast<std::size_t>(params_.cells + 1);
    }
    return x;
}

std::vector<double> Space::cell_origin(std::size_t cell) const {
    std::vector<double> x(static_cast<std::size_t>(params_.dim));
    for (auto& v : x) {
        v = static_cast<double>(cell % static_cast<std::size_t>(params_.cells)) * h();
        cell /= static_cast<std::size_t>(params_.cells);
    }
    return x;
}

std::vector<std::size_t> Space::cell_nodes(std::size_t cell) const {
    const int dim = params_.dim;
    const auto n = static_cast<std::size_t>(params_.cells);
    std::vector<std::size_t> idx(static_cast<std::size_t>(dim));
    for (auto& i : idx) {
        i = cell % n;
        cell /= n;
    }
    std::vector<std::size_t> out;
    for (int a = 0; a < ipow2(dim); ++a) {
        std::size_t id = 0;
        std::size_t stride = 1;
        for (int d = 0; d < dim; ++d) {
            id += (idx[static_cast<std::size_t>(d)] + static_cast<std::size_t>((a >> d) & 1)) * stride;
            stride *= n + 1;
        }
        out.push_back(id);
    }
    return out;
}

std::vector<double> Space::interpolate(const std::function<void(std::span<const double>, std::span<double>)>& u) const {
    std::vector<double> out(size());
    std::vector<double> val(static_cast<std::size_t>(params_.dim));
    for (std::size_t n = 0; n < nodes_; ++n) {
        u(node_point(n), val);
        for (int c = 0; c < params_.dim; ++c) out[dof(n, c)] = val[static_cast<std::size_t>(c)];
    }
    return out;
}

Operators assemble(const Space& space) {
    const int dim = space.dim();
    const double h = space.h();
    const double gamma = space.params().gamma;
    LocalBasis lb(dim);
    const int nl = lb.nloc;
    const int nr = lb.ncurl;
    const auto vol = unit_rule(dim, space.params().quadrature, h);
    const auto face = unit_rule(dim - 1, space.params().quadrature, h);

    // Volume blocks are identical for every cell of the uniform mesh.
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nl, nl);
    Eigen::MatrixXd curl = Eigen::MatrixXd::Zero(nl, nl);
    for (std::size_t q = 0; q < vol.points.size(); ++q) {
        lb.eval(vol.points[q], h);
        const double w = vol.weights[q];
        for (int i = 0; i < nl; ++i) {
            for (int j = 0; j < nl; ++j) {
                double mv = 0.0;
                for (int c = 0; c < dim; ++c) mv += lb.value[static_cast<std::size_t>(i * dim + c)] * lb.value[static_cast<std::size_t>(j * dim + c)];
                double cc = 0.0;
                for (int r = 0; r < nr; ++r) cc += lb.curl[static_cast<std::size_t>(i * nr + r)] * lb.curl[static_cast<std::size_t>(j * nr + r)];
                mass(i, j) += w * mv;
                curl(i, j) += w * cc;
            }
        }
    }

    sparse::SparseSystem sm(space.size());
    sparse::SparseSystem sa(space.size());
    sparse::SparseSystem sn(space.size());
    sparse::SparseSystem st(space.size());
    for (std::size_t cell = 0; cell < space.cell_count(); ++cell) {
        const auto dofs = local_dofs(space, cell);
        for (int i = 0; i < nl; ++i) {
            for (int j = 0; j < nl; ++j) {
                const auto r = dofs[static_cast<std::size_t>(i)];
                const auto c = dofs[static_cast<std::size_t>(j)];
                sm.accumulate(r, c, mass(i, j));
                sa.accumulate(r, c, curl(i, j));
                sn.accumulate(r, c, curl(i, j));
                st.accumulate(r, c, curl(i, j));
            }
        }
    }

    std::vector<double> xi(static_cast<std::size_t>(dim));
    std::vector<double> normal(static_cast<std::size_t>(dim));
    std::vector<double> cross(static_cast<std::size_t>(nl * nr));
    for (const auto& f : boundary_faces(space)) {
        const auto dofs = local_dofs(space, f.cell);
        Eigen::MatrixXd fa = Eigen::MatrixXd::Zero(nl, nl);
        Eigen::MatrixXd fn = Eigen::MatrixXd::Zero(nl, nl);
        Eigen::MatrixXd ft = Eigen::MatrixXd::Zero(nl, nl);
        for (std::size_t q = 0; q < face.points.size(); ++q) {
            face_point(f, dim, face.points[q], xi, normal);
            lb.eval(xi, h);
            const double w = face.weights[q];
            for (int l = 0; l < nl; ++l) {
                basis_cross_n(dim, l % dim, lb.psi[static_cast<std::size_t>(l / dim)], normal,
                              std::span<double>(cross).subspan(static_cast<std::size_t>(l * nr), static_cast<std::size_t>(nr)));
            }
            for (int i = 0; i < nl; ++i) {
                for (int j = 0; j < nl; ++j) {
                    double uv = 0.0;
                    for (int c = 0; c < dim; ++c) uv += lb.value[static_cast<std::size_t>(i * dim + c)] * lb.value[static_cast<std::size_t>(j * dim + c)];
                    double cc = 0.0;
                    double sym = 0.0;
                    for (int r = 0; r < nr; ++r) {
                        const double ci = lb.curl[static_cast<std::size_t>(i * nr + r)];
                        const double cj = lb.curl[static_cast<std::size_t>(j * nr + r)];
                        cc += ci * cj;
                        // <curl u_j, v_i x n> + <u_j x n, curl v_i>
                        sym += cj * cross[static_cast<std::size_t>(i * nr + r)] + cross[static_cast<std::size_t>(j * nr + r)] * ci;
                    }
                    fa(i, j) += w * (sym + gamma / h * uv);
                    fn(i, j) += w * uv / h;
                    ft(i, j) += w * (uv / h + h * cc);
                }
            }
        }
        for (int i = 0; i < nl; ++i) {
            for (int j = 0; j < nl; ++j) {
                const auto r = dofs[static_cast<std::size_t>(i)];
                const auto c = dofs[static_cast<std::size_t>(j)];
                sa.accumulate(r, c, fa(i, j));
                sn.accumulate(r, c, fn(i, j));
                st.accumulate(r, c, ft(i, j));
            }
        }
    }
    return {sm.compress(), sa.compress(), sn.compress(), st.compress()};
}

double form_value(const Operators& ops, std::span<const double> u, std::span<const double> v) {
    return ops.form.quadratic_form(v, u);
}

double discrete_norm_h(const Operators& ops, std::span<const double> u) {
    return std::sqrt(std::max(0.0, ops.norm_h.quadratic_form(u, u)));
}

double triple_norm_h(const Operators& ops, std::span<const double> u) {
    return std::sqrt(std::max(0.0, ops.triple_h.quadratic_form(u, u)));
}

std::vector<double> form_load(const Space& space, const ExactField& u) {
    const int dim = space.dim();
    const double h = space.h();
    const double gamma = space.params().gamma;
    LocalBasis lb(dim);
    const int nl = lb.nloc;
    const int nr = lb.ncurl;
    const auto vol = unit_rule(dim, space.params().quadrature + 1, h);
    const auto face = unit_rule(dim - 1, space.params().quadrature + 1, h);
    std::vector<double> out(space.size(), 0.0);
    std::vector<double> x(static_cast<std::size_t>(dim));
    std::vector<double> ex(static_cast<std::size_t>(dim + nr));
    for (std::size_t cell = 0; cell < space.cell_count(); ++cell) {
        const auto dofs = local_dofs(space, cell);
        const auto o = space.cell_origin(cell);
        for (std::size_t q = 0; q < vol.points.size(); ++q) {
            for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = o[static_cast<std::size_t>(d)] + h * vol.points[q][static_cast<std::size_t>(d)];
            u(x, ex);
            lb.eval(vol.points[q], h);
            for (int i = 0; i < nl; ++i) {
                double cc = 0.0;
                for (int r = 0; r < nr; ++r) cc += ex[static_cast<std::size_t>(dim + r)] * lb.curl[static_cast<std::size_t>(i * nr + r)];
                out[dofs[static_cast<std::size_t>(i)]] += vol.weights[q] * cc;
            }
        }
    }
    std::vector<double> xi(static_cast<std::size_t>(dim));
    std::vector<double> normal(static_cast<std::size_t>(dim));
    std::vector<double> cross(static_cast<std::size_t>(nr));
    std::vector<double> ucross(static_cast<std::size_t>(nr));
    for (const auto& f : boundary_faces(space)) {
        const auto dofs = local_dofs(space, f.cell);
        const auto o = space.cell_origin(f.cell);
        for (std::size_t q = 0; q < face.points.size(); ++q) {
            face_point(f, dim, face.points[q], xi, normal);
            for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = o[static_cast<std::size_t>(d)] + h * xi[static_cast<std::size_t>(d)];
            u(x, ex);
            lb.eval(xi, h);
            field_cross_n(dim, std::span<const double>(ex).first(static_cast<std::size_t>(dim)), normal, ucross);
            for (int i = 0; i < nl; ++i) {
                basis_cross_n(dim, i % dim, lb.psi[static_cast<std::size_t>(i / dim)], normal, cross);
                double s = 0.0;
                for (int r = 0; r < nr; ++r) {
                    s += ex[static_cast<std::size_t>(dim + r)] * cross[static_cast<std::size_t>(r)] +
                         ucross[static_cast<std::size_t>(r)] * lb.curl[static_cast<std::size_t>(i * nr + r)];
                }
                double uv = 0.0;
                for (int c = 0; c < dim; ++c) uv += ex[static_cast<std::size_t>(c)] * lb.value[static_cast<std::size_t>(i * dim + c)];
                out[dofs[static_cast<std::size_t>(i)]] += face.weights[q] * (s + gamma / h * uv);
            }
        }
    }
    return out;
}

std::vector<double> load(const Space& space,
                         const std::function<void(std::span<const double>, std::span<double>)>& f) {
    const int dim = space.dim();
    const double h = space.h();
    LocalBasis lb(dim);
    const auto vol = unit_rule(dim, space.params().quadrature + 1, h);
    std::vector<double> out(space.size(), 0.0);
    std::vector<double> x(static_cast<std::size_t>(dim));
    std::vector<double> val(static_cast<std::size_t>(dim));
    for (std::size_t cell = 0; cell < space.cell_count(); ++cell) {
        const auto dofs = local_dofs(space, cell);
        const auto o = space.cell_origin(cell);
        for (std::size_t q = 0; q < vol.points.size(); ++q) {
            for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = o[static_cast<std::size_t>(d)] + h * vol.points[q][static_cast<std::size_t>(d)];
            f(x, val);
            lb.eval(vol.points[q], h);
            for (int i = 0; i < lb.nloc; ++i) {
                double s = 0.0;
                for (int c = 0; c < dim; ++c) s += val[static_cast<std::size_t>(c)] * lb.value[static_cast<std::size_t>(i * dim + c)];
                out[dofs[static_cast<std::size_t>(i)]] += vol.weights[q] * s;
            }
        }
    }
    return out;
}

std::vector<double> ritz_project(const Space& space, const Operators& ops, const ExactField& u) {
    sparse::SolverOptions opts;
    opts.kind = sparse::SolverKind::direct;
    opts.tolerance = 1e-10;
    return sparse::solve(ops.form, form_load(space, u), opts);
}

FieldErrors errors(const Space& space, std::span<const double> uh, const ExactField& u) {
    const int dim = space.dim();
    const double h = space.h();
    LocalBasis lb(dim);
    const int nl = lb.nloc;
    const int nr = lb.ncurl;
    const auto vol = unit_rule(dim, space.params().quadrature + 2, h);
    const auto face = unit_rule(dim - 1, space.params().quadrature + 2, h);
    std::vector<double> x(static_cast<std::size_t>(dim));
    std::vector<double> ex(static_cast<std::size_t>(dim + nr));
    std::vector<double> dv(static_cast<std::size_t>(dim));
    std::vector<double> dc(static_cast<std::size_t>(nr));
    double l2 = 0.0;
    double curl2 = 0.0;
    double bnd = 0.0;
    double bcurl = 0.0;
    auto eval = [&](std::span<const double> local_xi, std::size_t cell, const std::vector<std::size_t>& dofs) {
        const auto o = space.cell_origin(cell);
        for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = o[static_cast<std::size_t>(d)] + h * local_xi[static_cast<std::size_t>(d)];
        u(x, ex);
        lb.eval(local_xi, h);
        for (int c = 0; c < dim; ++c) dv[static_cast<std::size_t>(c)] = -ex[static_cast<std::size_t>(c)];
        for (int r = 0; r < nr; ++r) dc[static_cast<std::size_t>(r)] = -ex[static_cast<std::size_t>(dim + r)];
        for (int i = 0; i < nl; ++i) {
            const double coef = uh[dofs[static_cast<std::size_t>(i)]];
            for (int c = 0; c < dim; ++c) dv[static_cast<std::size_t>(c)] += coef * lb.value[static_cast<std::size_t>(i * dim + c)];
            for (int r = 0; r < nr; ++r) dc[static_cast<std::size_t>(r)] += coef * lb.curl[static_cast<std::size_t>(i * nr + r)];
        }
    };
    for (std::size_t cell = 0; cell < space.cell_count(); ++cell) {
        const auto dofs = local_dofs(space, cell);
        for (std::size_t q = 0; q < vol.points.size(); ++q) {
            eval(vol.points[q], cell, dofs);
            for (double v : dv) l2 += vol.weights[q] * v * v;
            for (double v : dc) curl2 += vol.weights[q] * v * v;
        }
    }
    std::vector<double> xi(static_cast<std::size_t>(dim));
    std::vector<double> normal(static_cast<std::size_t>(dim));
    for (const auto& f : boundary_faces(space)) {
        const auto dofs = local_dofs(space, f.cell);
        for (std::size_t q = 0; q < face.points.size(); ++q) {
            face_point(f, dim, face.points[q], xi, normal);
            eval(xi, f.cell, dofs);
            for (double v : dv) bnd += face.weights[q] * v * v;
            for (double v : dc) bcurl += face.weights[q] * v * v;
        }
    }
    FieldErrors e;
    e.l2 = std::sqrt(l2);
    e.h_norm = std::sqrt(curl2 + bnd / h);
    e.triple = std::sqrt(curl2 + bnd / h + h * bcurl);
    return e;
}

double coercivity_constant(const Operators& ops) {
    const auto n = static_cast<Eigen::Index>(ops.norm_h.rows());
    const auto nd_v = ops.norm_h.to_dense();
    const Eigen::MatrixXd nd = Eigen::Map<const Eigen::MatrixXd>(nd_v.data(), n, n).transpose();
    const auto ad_v = ops.form.to_dense();
    const Eigen::MatrixXd ad = Eigen::Map<const Eigen::MatrixXd>(ad_v.data(), n, n).transpose();
    // Reduce to the range of the norm Gram matrix; the form vanishes on its kernel.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nd);
    const auto& lam = es.eigenvalues();
    const double cut = 1e-10 * lam.maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lam(i) > cut) keep.push_back(i);
    }
    Eigen::MatrixXd q(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        q.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]) / std::sqrt(lam(keep[k]));
    }
    const Eigen::MatrixXd reduced = q.transpose() * ad * q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rs(0.5 * (reduced + reduced.transpose()), Eigen::EigenvaluesOnly);
    return rs.eigenvalues().minCoeff();
}

TimeStepper::TimeStepper(const Operators& ops, double k, double tolerance) : ops_(&ops), k_(k) {
    if (!(k > 0.0)) throw InvalidConfig("nitsche time step must be positive");
    sparse::SparseSystem sys(ops.mass.rows());
    const double ik2 = 1.0 / (k * k);
    for (const auto* part : {&ops.mass, &ops.form}) {
        const double s = part == &ops.mass ? ik2 : 0.25;
        for (std::size_t r = 0; r < part->rows(); ++r) {
            for (auto p = part->row_ptr()[r]; p < part->row_ptr()[r + 1]; ++p) {
                sys.accumulate(r, static_cast<std::size_t>(part->col_idx()[static_cast<std::size_t>(p)]),
                               s * part->values()[static_cast<std::size_t>(p)]);
            }
        }
    }
    lu_ = std::make_unique<sparse::Factorization>(sys.compress(), tolerance);
}

TimeStepper::~TimeStepper() = default;

std::vector<double> TimeStepper::step(std::span<const double> prev2, std::span<const double> prev1,
                                      std::span<const double> load) const {
    const std::size_t n = prev1.size();
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = (2.0 * prev1[i] - prev2[i]) / (k_ * k_);
        b[i] = 0.25 * (2.0 * prev1[i] + prev2[i]);
    }
    auto rhs = ops_->mass.multiply(a);
    const auto ab = ops_->form.multiply(b);
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= ab[i] + load[i];
    return lu_->solve(rhs);
}

std::pair<std::vector<double>, std::vector<double>> startup(const Space& space, const Operators& ops,
                                                            const std::vector<ExactField>& derivatives, double k) {
    if (derivatives.size() < 2 || derivatives.size() > 4) {
        throw InvalidConfig("nitsche startup: supply E(0), E_t(0) and optionally E_tt(0), E_ttt(0)");
    }
    auto e0 = ritz_project(space, ops, derivatives[0]);
    const std::size_t m = static_cast<std::size_t>(space.dim() + space.curl_size());
    ExactField taylor = [&derivatives, k, m](std::span<const double> x, std::span<double> out) {
        std::vector<double> tmp(m);
        std::fill(out.begin(), out.end(), 0.0);
        double c = 1.0;
        for (std::size_t i = 0; i < derivatives.size(); ++i) {
            if (i > 0) c *= k / static_cast<double>(i);
            derivatives[i](x, tmp);
            for (std::size_t j = 0; j < m; ++j) out[j] += c * tmp[j];
        }
    };
    auto e1 = ritz_project(space, ops, taylor);
    return {std::move(e0), std::move(e1)};
}

double discrete_energy(const Operators& ops, std::span<const double> theta_m, std::span<const double> theta_m1,
                       double k) {
    if (theta_m.size() != theta_m1.size()) throw AssemblyError("discrete_energy: size mismatch");
    std::vector<double> d(theta_m.size());
    std::vector<double> s(theta_m.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = (theta_m[i] - theta_m1[i]) / k;
        s[i] = theta_m[i] + theta_m1[i];
    }
    return ops.mass.quadratic_form(d, d) + 0.25 * ops.form.quadratic_form(s, s);
}

}  // namespace vmsd::nitsche
