#include "vmsd/run.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "vmsd/errors.hpp"
#include "vmsd/space_time.hpp"

#ifndef VMSD_VERSION
#define VMSD_VERSION "0.0.0"
#endif

namespace vmsd::io {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

}  // namespace

std::string version() { return VMSD_VERSION; }

void write_atomic(const fs::path& path, std::span<const char> bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw Error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path);
}

void write_atomic(const fs::path& path, const std::string& content) {
    write_atomic(path, std::span<const char>(content.data(), content.size()));
}

std::string trajectory_csv(const std::vector<driver::TrajectoryRow>& rows) {
    std::string out = "t,E1,E2,B,K1,K2,mass,iters,residual\n";
    for (const auto& r : rows) {
        out += num(r.t) + "," + num(r.e1) + "," + num(r.e2) + "," + num(r.b) + "," + num(r.k1) + "," + num(r.k2) +
               "," + num(r.mass) + "," + std::to_string(r.iterations) + "," + num(r.residual) + "\n";
    }
    return out;
}

std::string reversibility_csv(const std::vector<driver::ErrorEntry>& entries) {
    std::string out = "unknown,norm,value\n";
    for (const auto& e : entries) out += e.unknown + "," + e.norm + "," + num(e.value) + "\n";
    return out;
}

std::string nitsche_csv(const std::vector<convergence::NitscheRow>& rows) {
    std::string out = "h,k,l2_error,h_norm_error,triple_norm_error,observed_order\n";
    for (const auto& r : rows) {
        out += num(r.h) + "," + num(r.k) + "," + num(r.error.l2) + "," + num(r.error.h_norm) + "," +
               num(r.error.triple) + "," + num(r.l2_order) + "\n";
    }
    return out;
}

std::string sd_csv(const std::vector<SdSeries>& series) {
    std::string out = "problem,degree,cells,h,k,l2_error,observed_order\n";
    for (const auto& s : series) {
        for (const auto& r : s.rows) {
            out += s.problem + "," + std::to_string(s.degree) + "," + std::to_string(r.cells) + "," + num(r.h) + "," +
                   num(r.k) + "," + num(r.error) + "," + num(r.order) + "\n";
        }
    }
    return out;
}

void write_snapshot(const fs::path& stem, const driver::CoupledSolver& solver, double t, int slab,
                    const std::string& format, double length) {
    const auto& field = solver.field_trace();
    const auto& density = solver.density_trace();
    const auto& grid = solver.grid();
    const auto& fspace = solver.field_space();
    auto data = stem;
    data += format == "binary" ? ".bin" : ".txt";
    if (format == "binary") {
        std::vector<double> all(field);
        all.insert(all.end(), density.begin(), density.end());
        write_atomic(data, std::span<const char>(reinterpret_cast<const char*>(all.data()), all.size() * sizeof(double)));
    } else {
        std::string text;
        char buf[40];
        for (const auto* block : {&field, &density}) {
            for (double v : *block) {
                std::snprintf(buf, sizeof buf, "%.17g\n", v);
                text += buf;
            }
        }
        write_atomic(data, text);
    }

    nlohmann::json side;
    side["file"] = data.filename().string();
    side["format"] = format == "binary" ? "float64 little-endian" : "text, one value per line";
    side["time"] = t;
    side["slab"] = slab;
    side["degree"] = grid.degree();
    side["length"] = length;
    side["x_cells"] = grid.x_mesh().cells(0);
    side["v_cells"] = {grid.velocity().mesh().cells(0), grid.velocity().mesh().cells(1)};
    const auto& vb1 = grid.velocity().mesh().bounds(0);
    const auto& vb2 = grid.velocity().mesh().bounds(1);
    side["v_box"] = {{vb1.lo, vb1.hi}, {vb2.lo, vb2.hi}};
    std::vector<double> xs;
    for (std::size_t n = 0; n < fspace.spatial_nodes(); ++n) xs.push_back(fspace.node_point(n)[0]);
    std::vector<double> v1;
    std::vector<double> v2;
    for (std::size_t n = 0; n < grid.v_nodes(); ++n) {
        const auto p = grid.velocity().node_point(n);
        v1.push_back(p[0]);
        v2.push_back(p[1]);
    }
    side["x_nodes"] = xs;
    side["v_nodes"] = {{"v1", v1}, {"v2", v2}};
    side["blocks"] = {
        {{"name", "field"},
         {"offset", 0},
         {"count", field.size()},
         {"layout", "index = x_node * 3 + component; components E1, E2, B; x in normalized [0, 1)"}},
        {{"name", "density"},
         {"offset", field.size()},
         {"count", density.size()},
         {"layout", "index = x_node + x_nodes * v_node; nodal values of f at (x_nodes, v_nodes)"}}};
    auto sidecar = stem;
    sidecar += ".json";
    write_atomic(sidecar, side.dump(2) + "\n");
}

namespace {

void say(std::ostream* log, const std::string& line) {
    if (log) *log << line << std::endl;
}

std::vector<fs::path> run_weibel(const config::RunConfig& c, std::ostream* log) {
    const auto d = c.discretization();
    const auto wc = c.weibel_case();
    driver::CoupledSolver solver(d, wc.length());
    solver.set_initial(driver::weibel_initial(wc));
    const fs::path dir = c.directory;
    std::vector<fs::path> out;
    auto snaps = c.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    auto maybe_snapshot = [&](double t, int slab) {
        while (next_snap < snaps.size() && snaps[next_snap] <= t + 1e-12) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%03zu", next_snap);
            write_snapshot(dir / name, solver, t, slab, c.snapshot_format, wc.length());
            out.push_back(dir / (std::string(name) + (c.snapshot_format == "binary" ? ".bin" : ".txt")));
            out.push_back(dir / (std::string(name) + ".json"));
            ++next_snap;
        }
    };
    std::vector<driver::TrajectoryRow> rows;
    rows.push_back(solver.diagnostics(0.0));
    maybe_snapshot(0.0, 0);
    const auto& time = solver.time();
    const int every = std::max(1, time.slab_count() / 20);
    for (int m = 0; m < time.slab_count(); ++m) {
        const auto it = solver.step(m);
        auto row = solver.diagnostics(time.slab_end(m));
        row.iterations = static_cast<int>(it.residuals.size());
        row.residual = it.residuals.back();
        rows.push_back(row);
        maybe_snapshot(row.t, m + 1);
        if ((m + 1) % every == 0 || m + 1 == time.slab_count()) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "t=%.3f B=%.4e E2=%.4e K1=%.6e K2=%.6e iters=%d residual=%.2e", row.t,
                          row.b, row.e2, row.k1, row.k2, row.iterations, row.residual);
            say(log, buf);
        }
    }
    write_atomic(dir / "trajectory.csv", trajectory_csv(rows));
    out.insert(out.begin(), dir / "trajectory.csv");
    return out;
}

std::vector<fs::path> run_reversibility(const config::RunConfig& c, std::ostream* log) {
    const auto d = c.discretization();
    say(log, "reversibility: x_cells=" + std::to_string(d.x_cells) + " v_cells=" + std::to_string(d.v_cells1) + "x" +
                 std::to_string(d.v_cells2) + " p=" + std::to_string(d.degree) + " slabs=" + std::to_string(d.slabs));
    const auto e = driver::reversibility_test(d, c.weibel_case());
    const fs::path path = fs::path(c.directory) / "reversibility.csv";
    write_atomic(path, reversibility_csv(e));
    return {path};
}

std::vector<fs::path> run_sd_convergence(const config::RunConfig& c, std::ostream* log) {
    convergence::SdStudy study;
    study.degree = c.degree;
    study.final_time = c.convergence_time;
    study.delta = c.delta;
    study.solver = c.discretization().solver;
    std::vector<SdSeries> series;
    if (c.problem != "vlasov") {
        series.push_back({"maxwell", c.degree, convergence::maxwell_manufactured(study, c.convergence_cells)});
    }
    if (c.problem != "maxwell") {
        series.push_back({"vlasov", c.degree, convergence::free_streaming(study, c.convergence_cells)});
    }
    for (const auto& s : series) {
        for (const auto& r : s.rows) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s p=%d cells=%d error=%.4e order=%.3f", s.problem.c_str(), s.degree,
                          r.cells, r.error, r.order);
            say(log, buf);
        }
    }
    const fs::path path = fs::path(c.directory) / "sd_convergence.csv";
    write_atomic(path, sd_csv(series));
    return {path};
}

std::vector<fs::path> run_nitsche(const config::RunConfig& c, bool ritz, std::ostream* log) {
    const auto rows = ritz ? convergence::ritz_study(c.gamma, c.nitsche_cells)
                           : convergence::nitsche_convergence(c.gamma, c.nitsche_cells, c.nitsche_time, c.step_ratio);
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "h=%.5f k=%.5f l2=%.4e (order %.3f) triple=%.4e (order %.3f)", r.h, r.k,
                      r.error.l2, r.l2_order, r.error.triple, r.triple_order);
        say(log, buf);
    }
    const fs::path path = fs::path(c.directory) / (ritz ? "ritz_study.csv" : "nitsche_convergence.csv");
    write_atomic(path, nitsche_csv(rows));
    return {path};
}

}  // namespace

RunResult run(const config::RunConfig& c, std::ostream* log) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<fs::path> artifacts;
    switch (c.mode) {
        case config::Mode::weibel_run: artifacts = run_weibel(c, log); break;
        case config::Mode::reversibility: artifacts = run_reversibility(c, log); break;
        case config::Mode::sd_convergence: artifacts = run_sd_convergence(c, log); break;
        case config::Mode::nitsche_convergence: artifacts = run_nitsche(c, false, log); break;
        case config::Mode::ritz_study: artifacts = run_nitsche(c, true, log); break;
    }
    RunResult r;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    nlohmann::json manifest;
    manifest["version"] = version();
    manifest["mode"] = config::to_string(c.mode);
    manifest["config_hash"] = config::hash(c);
    manifest["seed"] = c.seed;
    manifest["threads"] = sd::thread_count();
    manifest["wall_seconds"] = r.wall_seconds;
    std::vector<std::string> names;
    for (const auto& a : artifacts) names.push_back(a.filename().string());
    manifest["artifacts"] = names;
    manifest["config"] = config::render(c);
    const fs::path path = fs::path(c.directory) / "manifest.json";
    write_atomic(path, manifest.dump(2) + "\n");
    artifacts.push_back(path);
    r.artifacts = std::move(artifacts);
    return r;
}

}  // namespace vmsd::io
