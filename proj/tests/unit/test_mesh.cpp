#include <gtest/gtest.h>

#include <cmath>

#include "vmsd/errors.hpp"
#include "vmsd/mesh.hpp"

using namespace vmsd;
using namespace vmsd::mesh;

TEST(TimePartition, UniformKnots) {
    const auto tp = build_time_partition(5.0, 50);
    EXPECT_EQ(tp.slab_count(), 50);
    EXPECT_DOUBLE_EQ(tp.step, 0.1);
    EXPECT_DOUBLE_EQ(tp.slab_start(0), 0.0);
    EXPECT_DOUBLE_EQ(tp.slab_end(49), 5.0);
    EXPECT_NEAR(tp.slab_end(9), 1.0, 1e-15);
}

TEST(TimePartition, RejectsBadInput) {
    EXPECT_THROW(build_time_partition(0.0, 4), InvalidConfig);
    EXPECT_THROW(build_time_partition(1.0, 0), InvalidConfig);
}

TEST(TensorMesh, SinglePeriodicCellIsItsOwnNeighbor) {
    TensorMesh m({{0.0, 1.0}}, {1}, {true});
    EXPECT_EQ(m.neighbor(0, 0, 0), std::optional<std::size_t>(0));
    EXPECT_EQ(m.neighbor(0, 0, 1), std::optional<std::size_t>(0));
}

TEST(TensorMesh, WeibelSpacing) {
    TensorMesh m({{0.0, 1.0}}, {30}, {true});
    EXPECT_NEAR(m.cell_size(0), 1.0 / 30.0, 1e-15);
    EXPECT_EQ(m.neighbor(29, 0, 1), std::optional<std::size_t>(0));
    EXPECT_EQ(m.neighbor(0, 0, 0), std::optional<std::size_t>(29));
}

TEST(TensorMesh, VelocityCellDiameter) {
    TensorMesh m({{-1.0, 1.0}, {-1.0, 1.0}}, {12, 12}, {false, false});
    EXPECT_NEAR(m.cell_size(0), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(m.cell_diameter(), std::sqrt(2.0) / 6.0, 1e-15);
    EXPECT_FALSE(m.neighbor(0, 1, 0).has_value());
}

TEST(TensorMesh, LexicographicNumberingAndLocate) {
    TensorMesh m({{0.0, 2.0}, {0.0, 3.0}}, {2, 3}, {false, false});
    EXPECT_EQ(m.cell_count(), 6u);
    const int idx[] = {1, 2};
    EXPECT_EQ(m.cell_id(idx), 5u);
    EXPECT_EQ(m.cell_index(3), (std::vector<int>{1, 1}));
    const double p[] = {1.5, 2.5};
    EXPECT_EQ(m.locate(p), 5u);
    const double top[] = {2.0, 3.0};
    EXPECT_EQ(m.locate(top), 5u);
    const double out[] = {2.5, 0.0};
    EXPECT_THROW(m.locate(out), DomainError);
    EXPECT_DOUBLE_EQ(m.box_volume(), 6.0);
}

TEST(TensorMesh, RejectsEmptyInterval) {
    EXPECT_THROW(TensorMesh({{1.0, 1.0}}, {2}, {false}), InvalidConfig);
    EXPECT_THROW(TensorMesh({{0.0, 1.0}}, {0}, {false}), InvalidConfig);
}

TEST(HpAssignment, UniformDeltaEverywhere) {
    TensorMesh m({{0.0, 1.0}}, {8}, {true});
    const auto hp = assign_hp(m, build_time_partition(1.0, 4), UniformDelta{1, 0.05});
    ASSERT_EQ(hp.delta.size(), 32u);
    for (double d : hp.delta) EXPECT_DOUBLE_EQ(d, 0.05);
    EXPECT_EQ(hp.uniform_degree(), std::optional<int>(1));
    EXPECT_TRUE(hp.warnings.empty());
}

TEST(HpAssignment, TheoryDeltaFormula) {
    TensorMesh m({{0.0, 1.0}}, {5}, {true});  // h = 0.2
    const auto hp = assign_hp(m, build_time_partition(1.0, 2), TheoryDelta{2, 0.5, 0.5});
    for (double d : hp.delta) EXPECT_NEAR(d, 0.05, 1e-15);
    EXPECT_TRUE(hp.warnings.empty());  // p h = 0.4 <= 0.5
    const auto strict = assign_hp(m, build_time_partition(1.0, 2), TheoryDelta{2, 0.5, 0.3});
    EXPECT_EQ(strict.warnings.size(), 10u);
    EXPECT_NEAR(strict.warnings.front().product, 0.4, 1e-15);
}

TEST(HpAssignment, RejectsDegreeZero) {
    TensorMesh m({{0.0, 1.0}}, {2}, {true});
    EXPECT_THROW(assign_hp(m, build_time_partition(1.0, 1), UniformDelta{0, 0.05}), InvalidConfig);
}
