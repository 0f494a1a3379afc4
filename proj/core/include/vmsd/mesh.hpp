#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vmsd::mesh {

/// Uniform partition 0 = t_0 < ... < t_M = T of the time interval.
struct TimePartition {
    double final_time = 0.0;
    std::vector<double> knots;
    double step = 0.0;

    int slab_count() const { return static_cast<int>(knots.size()) - 1; }
    double slab_start(int m) const { return knots.at(static_cast<std::size_t>(m)); }
    double slab_end(int m) const { return knots.at(static_cast<std::size_t>(m) + 1); }
};

TimePartition build_time_partition(double final_time, int slab_count);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double length() const { return hi - lo; }
};

/// Uniform tensor-product box mesh in an arbitrary number of dimensions.
///
/// Cells are numbered lexicographically with the first dimension varying
/// fastest. A periodic dimension identifies its two end faces, so the
/// neighbor across the last cell's upper face is the first cell.
class TensorMesh {
public:
    TensorMesh() = default;
    TensorMesh(std::vector<Interval> bounds, std::vector<int> cells, std::vector<bool> periodic);

    int dim() const { return static_cast<int>(cells_.size()); }
    int cells(int d) const { return cells_[static_cast<std::size_t>(d)]; }
    const std::vector<int>& cell_counts() const { return cells_; }
    const Interval& bounds(int d) const { return bounds_[static_cast<std::size_t>(d)]; }
    bool periodic(int d) const { return periodic_[static_cast<std::size_t>(d)]; }
    double cell_size(int d) const { return bounds(d).length() / cells(d); }
    std::size_t cell_count() const { return cell_count_; }

    std::vector<int> cell_index(std::size_t cell) const;
    std::size_t cell_id(std::span<const int> index) const;

    /// Lower corner of a cell in physical coordinates.
    std::vector<double> cell_origin(std::size_t cell) const;
    double cell_volume() const;
    /// Euclidean diameter of one cell.
    double cell_diameter() const;
    double box_volume() const;

    /// Neighbor across the lower (side = 0) or upper (side = 1) face in
    /// dimension d; empty on a non-periodic boundary.
    std::optional<std::size_t> neighbor(std::size_t cell, int d, int side) const;

    /// Cell containing a physical point; points on the upper boundary map to
    /// the last cell. Throws DomainError outside the box.
    std::size_t locate(std::span<const double> point) const;

private:
    std::vector<Interval> bounds_;
    std::vector<int> cells_;
    std::vector<bool> periodic_;
    std::size_t cell_count_ = 0;
};

struct UniformDelta {
    int degree = 1;
    double delta = 0.05;
};

/// delta_K = c1 * h_K / p_K with the admissibility diagnostic p_K h_K <= c2.
struct TheoryDelta {
    int degree = 1;
    double c1 = 0.5;
    double c2 = 0.5;
};

using DeltaRule = std::variant<UniformDelta, TheoryDelta>;

struct AdmissibilityWarning {
    std::size_t space_time_cell;
    double product;  // p_K * h_K
    double bound;    // c2
};

/// Per space-time cell (slab-major: index = m * spatial_cells + cell) degree,
/// diameter and streamline-diffusion weight.
struct HpAssignment {
    std::size_t spatial_cells = 0;
    int slabs = 0;
    std::vector<int> degree;
    std::vector<double> diameter;
    std::vector<double> delta;
    std::vector<AdmissibilityWarning> warnings;

    std::size_t index(int slab, std::size_t cell) const {
        return static_cast<std::size_t>(slab) * spatial_cells + cell;
    }
    std::span<const double> slab_delta(int slab) const {
        return std::span<const double>(delta).subspan(static_cast<std::size_t>(slab) * spatial_cells,
                                                      spatial_cells);
    }
    /// The common degree when all cells agree; empty otherwise.
    std::optional<int> uniform_degree() const;
};

HpAssignment assign_hp(const TensorMesh& mesh, const TimePartition& time, const DeltaRule& rule);

}  // namespace vmsd::mesh
