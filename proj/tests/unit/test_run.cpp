#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "vmsd/config.hpp"
#include "vmsd/run.hpp"

using namespace vmsd;
namespace fs = std::filesystem;

namespace {

const char* kSmoke =
    "[mesh]\nx_cells = 4\nv_cells1 = 4\nv_cells2 = 4\n"
    "[time]\nfinal_time = 0.4\nslabs = 4\n"
    "[convergence]\ncells = 2, 4\nfinal_time = 0.5\n"
    "[nitsche]\ncells = 2, 4\n"
    "[output]\nsnapshot_times = 0.2\n";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

class RunTest : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("vmsd_run_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    io::RunResult go(config::Mode mode, const std::string& sub) {
        auto c = config::parse(kSmoke);
        c.mode = mode;
        c.directory = (root_ / sub).string();
        return io::run(c);
    }

    fs::path root_;
};

bool has_tmp(const fs::path& dir) {
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.path().extension() == ".tmp") return true;
    return false;
}

}  // namespace

TEST_F(RunTest, WeibelTrajectoryAndSnapshot) {
    const auto r = go(config::Mode::weibel_run, "a");
    const auto rows = lines(slurp(root_ / "a" / "trajectory.csv"));
    ASSERT_EQ(rows.size(), 6u);  // header + t = 0 + 4 slabs
    EXPECT_EQ(rows[0], "t,E1,E2,B,K1,K2,mass,iters,residual");
    EXPECT_TRUE(fs::exists(root_ / "a" / "snapshot_000.txt"));
    EXPECT_TRUE(fs::exists(root_ / "a" / "snapshot_000.json"));
    const auto manifest = slurp(root_ / "a" / "manifest.json");
    EXPECT_NE(manifest.find("\"config_hash\""), std::string::npos);
    EXPECT_NE(manifest.find("\"wall_seconds\""), std::string::npos);
    EXPECT_NE(manifest.find(io::version()), std::string::npos);
    EXPECT_FALSE(has_tmp(root_));
    EXPECT_EQ(r.artifacts.back().filename(), "manifest.json");
}

TEST_F(RunTest, SnapshotHoldsBothTraces) {
    go(config::Mode::weibel_run, "a");
    const auto values = lines(slurp(root_ / "a" / "snapshot_000.txt"));
    const auto side = slurp(root_ / "a" / "snapshot_000.json");
    // 4 periodic x-nodes * 3 fields + 4 x-nodes * 9 interior v-nodes.
    EXPECT_EQ(values.size(), 12u + 36u);
    EXPECT_NE(side.find("\"density\""), std::string::npos);
}

TEST_F(RunTest, ReversibilityHasEightRows) {
    go(config::Mode::reversibility, "r");
    const auto rows = lines(slurp(root_ / "r" / "reversibility.csv"));
    ASSERT_EQ(rows.size(), 9u);
    EXPECT_EQ(rows[0], "unknown,norm,value");
    EXPECT_EQ(rows[1].rfind("f,L1,", 0), 0u);
    EXPECT_EQ(rows[8].rfind("B,L2,", 0), 0u);
}

TEST_F(RunTest, NitscheConvergenceHeader) {
    go(config::Mode::nitsche_convergence, "n");
    const auto rows = lines(slurp(root_ / "n" / "nitsche_convergence.csv"));
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], "h,k,l2_error,h_norm_error,triple_norm_error,observed_order");
    go(config::Mode::ritz_study, "q");
    EXPECT_EQ(lines(slurp(root_ / "q" / "ritz_study.csv")).size(), 3u);
}

TEST_F(RunTest, SdConvergenceHasBothProblems) {
    go(config::Mode::sd_convergence, "s");
    const auto rows = lines(slurp(root_ / "s" / "sd_convergence.csv"));
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], "problem,degree,cells,h,k,l2_error,observed_order");
}

TEST_F(RunTest, CsvOutputIsDeterministic) {
    go(config::Mode::weibel_run, "x");
    go(config::Mode::weibel_run, "y");
    EXPECT_EQ(slurp(root_ / "x" / "trajectory.csv"), slurp(root_ / "y" / "trajectory.csv"));
    EXPECT_EQ(slurp(root_ / "x" / "snapshot_000.txt"), slurp(root_ / "y" / "snapshot_000.txt"));
}

TEST_F(RunTest, AtomicWriteReplacesContent) {
    const auto p = root_ / "deep" / "file.csv";
    io::write_atomic(p, std::string("one\n"));
    io::write_atomic(p, std::string("two\n"));
    EXPECT_EQ(slurp(p), "two\n");
    EXPECT_FALSE(has_tmp(root_));
}
