#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qedk/qedk.hpp"

namespace {

void print_reports(const qedk::RunResult& res) {
    for (const auto& r : res.reports) {
        std::printf("[%s] %-22s max_residual=%.3e tolerance=%.3e  (%s)\n",
                    r.pass ? "PASS" : "FAIL", r.check.c_str(), r.max_residual, r.tolerance,
                    r.medium.c_str());
    }
    for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
}

// output directory priority: --out, then scenario.out, then QEDK_OUT
int run_config(const std::string& path, const std::string& out_cli, bool emit_series) {
    auto cfg = qedk::load_config(path);
    qedk::RunOptions opts;
    opts.emit_series = emit_series;
    if (!out_cli.empty()) {
        opts.out_dir = out_cli;
    } else if (cfg.out_dir.empty()) {
        if (const char* env = std::getenv("QEDK_OUT"); env && *env) opts.out_dir = env;
    }
    auto res = qedk::run(cfg, opts);
    print_reports(res);
    return res.exit_code;
}

void list_examples() {
    std::printf("scenario kinds (set scenario.kind in a config file):\n");
    std::printf("  kernels     mode kernels Z, r, h as CSV plus the kernel identity report\n");
    std::printf("  coupling    |f(w)|^2 spectrum and the chi round-trip report\n");
    std::printf("  commutator  canonical commutator c(t) against 1\n");
    std::printf("  energy      instantaneous-medium energy constancy (alias: example2)\n");
    std::printf("  kk          permittivity curve and the Kramers-Kronig residual\n");
    std::printf("  example1    vacuum reduction: Z against the free phase factor\n");
    std::printf("  example2    same as energy\n");
    std::printf("  example3    constant-memory medium against the damped closed form\n");
    std::printf("  example4    lorentz pole structure and the Omega+- invariants\n");
    std::printf("ready-to-run configs ship in the configs/ directory of the source tree.\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mode kernels and consistency checks for quantized fields in dispersive media"};
    app.require_subcommand(1);

    std::string config_path, out_dir;

    auto* cmd_run = app.add_subcommand("run", "run a scenario config, emit CSV/JSON artifacts");
    cmd_run->add_option("config", config_path, "scenario config file (JSON)")->required();
    cmd_run->add_option("--out", out_dir, "output directory (beats scenario.out and QEDK_OUT)");

    auto* cmd_check = app.add_subcommand("check", "run the checks only, write nothing");
    cmd_check->add_option("config", config_path, "scenario config file (JSON)")->required();

    auto* cmd_examples = app.add_subcommand("examples", "describe the bundled scenarios");
    cmd_examples->add_subcommand("list", "list scenario kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e); // prints help or the usage error
        return rc == 0 ? 0 : 2;
    }

    try {
        if (cmd_run->parsed()) return run_config(config_path, out_dir, true);
        if (cmd_check->parsed()) return run_config(config_path, "", false);
        if (cmd_examples->parsed()) {
            list_examples();
            return 0;
        }
    } catch (const qedk::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const qedk::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
