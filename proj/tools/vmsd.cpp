#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "vmsd/config.hpp"
#include "vmsd/errors.hpp"
#include "vmsd/run.hpp"
#include "vmsd/space_time.hpp"

namespace {

// VMSD_THREADS unless --threads is given; 0 keeps the OpenMP default.
int resolve_threads(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("VMSD_THREADS")) {
        try {
            return std::max(0, std::stoi(env));
        } catch (const std::exception&) {
            throw vmsd::InvalidConfig(std::string("VMSD_THREADS: expected an integer, got '") + env + "'");
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Space-time streamline diffusion and Nitsche solvers for the Vlasov-Maxwell system"};
    app.set_version_flag("--version", vmsd::io::version());
    std::string mode;
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    std::uint64_t seed = 0;
    app.add_option("mode", mode, "weibel-run | reversibility | sd-convergence | nitsche-convergence | ritz-study")
        ->required()
        ->check(CLI::IsMember({"weibel-run", "reversibility", "sd-convergence", "nitsche-convergence", "ritz-study"}));
    app.add_option("--config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides [output] directory)");
    app.add_option("--threads", threads, "Worker threads (overrides VMSD_THREADS)")->check(CLI::NonNegativeNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Random seed recorded in the manifest (overrides [run] seed)");
    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = vmsd::config::parse_file(config_path);
        cfg.mode = vmsd::config::mode_from_string(mode);
        if (*out_opt) cfg.directory = out_dir;
        if (*seed_opt) cfg.seed = seed;
        vmsd::sd::set_thread_count(resolve_threads(threads));
        const auto result = vmsd::io::run(cfg, &std::cerr);
        for (const auto& a : result.artifacts) std::cout << a.string() << "\n";
        std::cerr << "done in " << result.wall_seconds << " s\n";
    } catch (const vmsd::Error& e) {
        std::cerr << "vmsd: error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "vmsd: unexpected failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
