#include "vmsd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <type_traits>

#include "vmsd/errors.hpp"

namespace vmsd::mesh {

TimePartition build_time_partition(double final_time, int slab_count) {
    if (!(final_time > 0.0) || !std::isfinite(final_time)) {
        throw InvalidConfig("time partition: final time must be positive, got " +
                            std::to_string(final_time));
    }
    if (slab_count < 1) {
        throw InvalidConfig("time partition: slab count must be >= 1, got " +
                            std::to_string(slab_count));
    }
    TimePartition tp;
    tp.final_time = final_time;
    tp.step = final_time / slab_count;
    tp.knots.resize(static_cast<std::size_t>(slab_count) + 1);
    for (int m = 0; m <= slab_count; ++m) {
        tp.knots[static_cast<std::size_t>(m)] = final_time * m / slab_count;
    }
    tp.knots.back() = final_time;
    return tp;
}

TensorMesh::TensorMesh(std::vector<Interval> bounds, std::vector<int> cells,
                       std::vector<bool> periodic)
    : bounds_(std::move(bounds)), cells_(std::move(cells)), periodic_(std::move(periodic)) {
    if (bounds_.size() != cells_.size() || periodic_.size() != cells_.size() || cells_.empty()) {
        throw InvalidConfig("tensor mesh: bounds, cell counts and periodic flags must have equal, nonzero length");
    }
    cell_count_ = 1;
    for (std::size_t d = 0; d < cells_.size(); ++d) {
        if (!(bounds_[d].hi > bounds_[d].lo)) {
            throw InvalidConfig("tensor mesh: empty interval in dimension " + std::to_string(d));
        }
        if (cells_[d] < 1) {
            throw InvalidConfig("tensor mesh: cell count must be >= 1 in dimension " + std::to_string(d));
        }
        cell_count_ *= static_cast<std::size_t>(cells_[d]);
    }
}

std::vector<int> TensorMesh::cell_index(std::size_t cell) const {
    std::vector<int> idx(cells_.size());
    for (std::size_t d = 0; d < cells_.size(); ++d) {
        idx[d] = static_cast<int>(cell % static_cast<std::size_t>(cells_[d]));
        cell /= static_cast<std::size_t>(cells_[d]);
    }
    return idx;
}

std::size_t TensorMesh::cell_id(std::span<const int> index) const {
    std::size_t id = 0;
    for (std::size_t d = cells_.size(); d-- > 0;) {
        id = id * static_cast<std::size_t>(cells_[d]) + static_cast<std::size_t>(index[d]);
    }
    return id;
}

std::vector<double> TensorMesh::cell_origin(std::size_t cell) const {
    auto idx = cell_index(cell);
    std::vector<double> origin(cells_.size());
    for (std::size_t d = 0; d < cells_.size(); ++d) {
        origin[d] = bounds_[d].lo + idx[d] * cell_size(static_cast<int>(d));
    }
    return origin;
}

double TensorMesh::cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dim(); ++d) v *= cell_size(d);
    return v;
}

double TensorMesh::cell_diameter() const {
    double s = 0.0;
    for (int d = 0; d < dim(); ++d) s += cell_size(d) * cell_size(d);
    return std::sqrt(s);
}

double TensorMesh::box_volume() const {
    double v = 1.0;
    for (const auto& b : bounds_) v *= b.length();
    return v;
}

std::optional<std::size_t> TensorMesh::neighbor(std::size_t cell, int d, int side) const {
    auto idx = cell_index(cell);
    const int n = cells(d);
    int& i = idx[static_cast<std::size_t>(d)];
    i += side == 0 ? -1 : 1;
    if (i < 0 || i >= n) {
        if (!periodic(d)) return std::nullopt;
        i = (i + n) % n;
    }
    return cell_id(idx);
}

std::size_t TensorMesh::locate(std::span<const double> point) const {
    if (point.size() != cells_.size()) {
        throw DomainError("tensor mesh: point dimension mismatch");
    }
    std::vector<int> idx(cells_.size());
    for (std::size_t d = 0; d < cells_.size(); ++d) {
        const auto& b = bounds_[d];
        const double tol = 1e-12 * b.length();
        if (point[d] < b.lo - tol || point[d] > b.hi + tol) {
            throw DomainError("tensor mesh: point outside box in dimension " + std::to_string(d));
        }
        int i = static_cast<int>(std::floor((point[d] - b.lo) / cell_size(static_cast<int>(d))));
        idx[d] = std::clamp(i, 0, cells_[d] - 1);
    }
    return cell_id(idx);
}

std::optional<int> HpAssignment::uniform_degree() const {
    if (degree.empty()) return std::nullopt;
    for (int p : degree) {
        if (p != degree.front()) return std::nullopt;
    }
    return degree.front();
}

HpAssignment assign_hp(const TensorMesh& mesh, const TimePartition& time, const DeltaRule& rule) {
    HpAssignment hp;
    hp.spatial_cells = mesh.cell_count();
    hp.slabs = time.slab_count();
    const std::size_t n = hp.spatial_cells * static_cast<std::size_t>(hp.slabs);
    const double h = mesh.cell_diameter();

    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if (r.degree < 1) throw InvalidConfig("hp assignment: degree must be >= 1");
            hp.degree.assign(n, r.degree);
            hp.diameter.assign(n, h);
            if constexpr (std::is_same_v<R, UniformDelta>) {
                if (!(r.delta >= 0.0)) throw InvalidConfig("hp assignment: delta must be >= 0");
                hp.delta.assign(n, r.delta);
            } else {
                if (!(r.c1 > 0.0)) throw InvalidConfig("hp assignment: C1 must be > 0");
                hp.delta.resize(n);
                for (std::size_t i = 0; i < n; ++i) {
                    hp.delta[i] = r.c1 * hp.diameter[i] / hp.degree[i];
                    const double product = hp.degree[i] * hp.diameter[i];
                    if (product > r.c2) hp.warnings.push_back({i, product, r.c2});
                }
            }
        },
        rule);
    return hp;
}

}  // namespace vmsd::mesh
