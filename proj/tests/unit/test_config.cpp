#include <gtest/gtest.h>

#include <string>

#include "vmsd/config.hpp"
#include "vmsd/errors.hpp"

using namespace vmsd;
using namespace vmsd::config;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const InvalidConfig& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    EXPECT_EQ(parse(""), RunConfig{});
}

TEST(Config, CasePresetAppliesBeforeExplicitKeys) {
    const auto c = parse("[case]\ncase = 2\n");
    EXPECT_DOUBLE_EQ(c.mu, 1.0 / 6.0);
    EXPECT_DOUBLE_EQ(c.v01, -0.5);
    EXPECT_DOUBLE_EQ(c.v02, -0.1);
    const auto d = parse("[case]\nbeta = 0.02\ncase = 2\n");
    EXPECT_DOUBLE_EQ(d.beta, 0.02);
    EXPECT_DOUBLE_EQ(d.mu, 1.0 / 6.0);
}

TEST(Config, MeshPresetResolution) {
    const auto c = parse("[mesh]\npreset = H2\n[time]\nfinal_time = 1\n");
    const auto d = c.discretization();
    EXPECT_EQ(d.x_cells, 20);
    EXPECT_EQ(d.v_cells1, 12);
    EXPECT_EQ(d.slabs, 20);
    const auto e = parse("[mesh]\npreset = H2\nx_cells = 7\n").discretization();
    EXPECT_EQ(e.x_cells, 7);
    EXPECT_EQ(e.v_cells2, 12);
}

TEST(Config, ParsesListsAndBooleans) {
    const auto c = parse(
        "[run]\nmode = nitsche-convergence\nseed = 42\n"
        "[method]\nrelativistic = true\n"
        "[nitsche]\ncells = 2, 4, 8\n"
        "[output]\nsnapshot_times = 0, 12.5\n");
    EXPECT_EQ(c.mode, Mode::nitsche_convergence);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_TRUE(c.relativistic);
    EXPECT_EQ(c.nitsche_cells, (std::vector<int>{2, 4, 8}));
    EXPECT_EQ(c.snapshot_times, (std::vector<double>{0.0, 12.5}));
}

TEST(Config, RejectsZeroDegree) {
    EXPECT_NE(error_of("[method]\ndegree = 0\n").find("method.degree"), std::string::npos);
}

TEST(Config, RejectsUnknownKeysAndSections) {
    EXPECT_NE(error_of("[method]\ndegre = 2\n").find("method.degre: unknown key"), std::string::npos);
    EXPECT_NE(error_of("[bogus]\nx = 1\n").find("bogus.x"), std::string::npos);
    EXPECT_FALSE(error_of("orphan = 1\n").empty());
}

TEST(Config, RejectsMalformedValues) {
    EXPECT_NE(error_of("[method]\ndegree = two\n").find("method.degree"), std::string::npos);
    EXPECT_NE(error_of("[method]\ndegree = 1.5\n").find("method.degree"), std::string::npos);
    EXPECT_NE(error_of("[time]\nfinal_time = nan\n").find("time.final_time"), std::string::npos);
    EXPECT_NE(error_of("[method]\nrelativistic = maybe\n").find("method.relativistic"), std::string::npos);
    EXPECT_NE(error_of("[run]\nmode = fly\n").find("run.mode"), std::string::npos);
    EXPECT_NE(error_of("[mesh]\nv1_min = 1\nv1_max = -1\n").find("mesh.v1_min"), std::string::npos);
    EXPECT_NE(error_of("[solver]\nkind = magic\n"), "");
}

TEST(Config, RenderRoundTrips) {
    auto c = parse(
        "[case]\ncase = 2\n[mesh]\nx_cells = 16\nv1_min = -1.1\n[time]\nslabs = 33\n"
        "[method]\ndelta = 0.3\ndelta_rule = theory\n[output]\nsnapshot_times = 0, 0.1, 70\n");
    EXPECT_EQ(parse(render(c)), c);
    EXPECT_EQ(parse(render(RunConfig{})), RunConfig{});
    EXPECT_NE(render(c).find("v1_min = -1.1\n"), std::string::npos);
}

TEST(Config, HashIsStableAndSensitive) {
    const auto a = parse("[method]\ndegree = 2\n");
    const auto b = parse("[method]\n  degree =   2  \n");
    EXPECT_EQ(hash(a), hash(b));
    EXPECT_EQ(hash(a).size(), 64u);
    EXPECT_NE(hash(a), hash(parse("[method]\ndegree = 3\n")));
    // SHA-256 of the empty-config canonical text does not depend on run order.
    EXPECT_EQ(hash(RunConfig{}), hash(RunConfig{}));
}

TEST(Config, ModeNamesRoundTrip) {
    for (auto m : {Mode::weibel_run, Mode::reversibility, Mode::sd_convergence, Mode::nitsche_convergence,
                   Mode::ritz_study}) {
        EXPECT_EQ(mode_from_string(to_string(m)), m);
    }
}
