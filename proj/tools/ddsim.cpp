// ddsim: validate | ambiguity | sweep

#include "ddsim/ambiguity.hpp"
#include "ddsim/experiment_io.hpp"
#include "ddsim/simulation.hpp"
#include "ddsim/validation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace ddsim;

namespace {

int default_workers() {
    if (const char* env = std::getenv("DDSIM_WORKERS")) {
        try {
            const int w = std::stoi(env);
            if (w > 0) return w;
        } catch (const std::exception&) {
        }
        std::cerr << "ignoring DDSIM_WORKERS=" << env << "\n";
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

int cmd_validate(std::uint64_t seed, int trials) {
    ValidationOptions opts;
    opts.seed = seed;
    if (trials > 0) opts.thumbtack_trials = trials;
    const auto feas = check_feasibility(opts.config, 2.51e-6, 815.0);
    std::printf("feasibility at Veh-A, nu_max = 815 Hz: %.2f kHz <= %.0f kHz <= %.3f kHz\n", feas.min_spacing / 1e3,
                feas.spacing / 1e3, feas.max_spacing / 1e3);
    int failed = 0;
    for (const auto& r : run_validation(opts)) {
        std::printf("%s  %-40s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        failed += !r.pass;
    }
    std::printf("%d check(s) failed\n", failed);
    return failed ? 1 : 0;
}

int cmd_ambiguity(const std::vector<std::string>& schemes, std::uint64_t seed, int frames, const fs::path& out) {
    fs::create_directories(out);
    const FrameConfig cfg{13, 16, 30e3, 2.4e9};
    for (const auto& name : schemes) {
        const Basis basis(BasisScheme{parse_scheme(name), cfg, {}});
        const auto d = expected_thumbtack_diagnostic(basis, Constellation::psk(4), frames, SeedSpec{seed});
        const fs::path file = out / ("ambiguity_" + lower(to_string(basis.tag())) + ".csv");
        std::ostringstream csv;
        write_surface_csv(csv, d.mean);
        write_file_atomic(file, csv.str());
        std::printf("%s: origin %.12f, max off-origin %.4g -> %s\n", to_string(basis.tag()).c_str(), d.origin.real(),
                    d.max_off_origin, file.c_str());
    }
    return 0;
}

int cmd_sweep(const fs::path& spec_path, const fs::path& out, std::optional<std::uint64_t> seed,
              std::optional<int> trials, int workers) {
    ExperimentSpec spec = load_spec(spec_path);
    if (seed) spec.seed = *seed;
    if (trials) spec.trials = *trials;
    if (trials && *trials < 1) throw ConfigError("--trials must be >= 1");

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) {
        std::cerr << "cannot create output directory " << out << "\n";
        return 3;
    }

    RunManifest manifest;
    manifest.spec = spec;
    manifest.version = library_version();
    manifest.started_utc = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = run_sweep(spec, workers, [](const Cell& c, std::size_t i, std::size_t n) {
        std::fprintf(stderr, "[%zu/%zu] %s %s F=%d snr=%g nu=%g\n", i + 1, n, to_string(c.scheme).c_str(),
                     to_string(c.mode).c_str(), c.frames, c.snr_db, c.nu_max);
    });
    manifest.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.failures = result.failures;

    const fs::path csv = out / (spec.name + ".csv");
    write_file_atomic(csv, format_csv(result.rows));
    manifest.outputs.push_back(csv.filename().string());
    write_file_atomic(out / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");

    for (const auto& f : result.failures) {
        std::cerr << "cell failed: " << to_string(f.cell.scheme) << " " << to_string(f.cell.mode) << " F=" << f.cell.frames
                  << " snr=" << f.cell.snr_db << ": " << f.message << "\n";
    }
    std::printf("%zu rows -> %s (%.1f s)\n", result.rows.size(), csv.c_str(), manifest.wall_clock_s);
    return result.failures.empty() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-Doppler link-level simulator"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    int trials = 0;
    auto* validate = app.add_subcommand("validate", "Run the basis and ambiguity identity checks");
    validate->add_option("--seed", seed, "Master seed");
    validate->add_option("--trials", trials, "Frames in the thumbtack Monte-Carlo (default 2000)");

    std::vector<std::string> schemes{"ofdm", "afdm", "otsm", "zak"};
    int frames = 1;
    std::string out = "out";
    auto* amb = app.add_subcommand("ambiguity", "Write |A_x[k,l]| heatmaps as CSV");
    amb->add_option("--scheme", schemes, "Schemes (ofdm, afdm, otsm, zak)");
    amb->add_option("--seed", seed, "Master seed");
    amb->add_option("--trials", frames, "Frames averaged per heatmap")->check(CLI::PositiveNumber);
    amb->add_option("--out", out, "Output directory");

    std::string spec_path;
    std::optional<std::uint64_t> sweep_seed;
    std::optional<int> sweep_trials;
    int workers = 0;
    auto* sweep = app.add_subcommand("sweep", "Run an experiment spec (or a manifest) and write CSV");
    sweep->add_option("--spec", spec_path, "Experiment spec or manifest.json")->required();
    sweep->add_option("--out", out, "Output directory");
    sweep->add_option("--seed", sweep_seed, "Override the spec's master seed");
    sweep->add_option("--trials", sweep_trials, "Override trials per cell");
    sweep->add_option("--workers", workers, "Worker threads (default: DDSIM_WORKERS or all cores)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(seed, trials);
        if (*amb) return cmd_ambiguity(schemes, seed, frames, out);
        if (*sweep) return cmd_sweep(spec_path, out, sweep_seed, sweep_trials, workers > 0 ? workers : default_workers());
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
