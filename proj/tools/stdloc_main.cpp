// Command-line front end: one reproducibility surface for the demo, tracking,
// hit-rate, SNR-sweep, bound and forward-dump runs. Every command writes a
// manifest (config echo + seed + version, no timestamps) next to its outputs.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stdloc/commands.hpp"
#include "stdloc/log.hpp"
#include "stdloc/version.hpp"

namespace {

using namespace stdloc;

struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
    std::optional<int> samples;
    std::optional<double> noise;
    bool overwrite = false;
    std::optional<std::string> node_at;
};

RunConfig effective_config(const Overrides& ov) {
    RunConfig cfg = parse_config(ov.config_path);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out_dir) cfg.output_dir = *ov.out_dir;
    if (ov.workers) {
        if (*ov.workers < 0) throw config_error("--workers must be >= 0");
        cfg.workers = *ov.workers;
    }
    if (ov.samples) {
        if (*ov.samples < 1) throw config_error("--samples must be >= 1");
        cfg.hitmap.samples_per_node = *ov.samples;
        cfg.sweep.samples = *ov.samples;
    }
    if (ov.noise) {
        if (*ov.noise < 0.0 || *ov.noise >= 100.0)
            throw config_error("--noise must lie in [0, 100)");
        cfg.noise_percent = *ov.noise;
        cfg.hitmap.noise_percent = *ov.noise;
        cfg.tracking.noise_percent = *ov.noise;
        cfg.bound.noise_percent = *ov.noise;
    }
    if (ov.overwrite) cfg.overwrite = true;
    if (ov.node_at) {
        double x = 0.0, y = 0.0;
        char trailing = 0;
        if (std::sscanf(ov.node_at->c_str(), "%lf,%lf%c", &x, &y, &trailing) != 2)
            throw config_error("--node-at expects 'x,y'");
        cfg.bound.node_at = Vector2(x, y);
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Standardized source localization on the unit disk"};
    app.set_version_flag("--version", std::string(stdloc::kArtifactVersion));
    app.require_subcommand(1);

    Overrides ov;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", ov.config_path, "JSON configuration file");
        cmd->add_option("--seed", ov.seed, "RNG seed (overrides config)");
        cmd->add_option("--out", ov.out_dir, "output directory (overrides config)");
        cmd->add_option("--workers", ov.workers,
                        "worker threads for Monte-Carlo loops (0 = auto)");
        cmd->add_option("--samples", ov.samples,
                        "Monte-Carlo samples (overrides config)");
        cmd->add_option("--noise", ov.noise, "noise percent (overrides config)");
        cmd->add_flag("--overwrite", ov.overwrite, "replace existing output files");
    };

    CLI::App* demo = app.add_subcommand("demo", "far-field single-source demo");
    add_common(demo);
    CLI::App* track = app.add_subcommand("track", "two-source tracking study");
    add_common(track);
    CLI::App* hitmap = app.add_subcommand("hitmap", "Monte-Carlo hit-rate map");
    add_common(hitmap);
    CLI::App* sweep = app.add_subcommand("snr-sweep", "rate-vs-bound noise sweep");
    add_common(sweep);
    CLI::App* bound = app.add_subcommand("bound", "localization bound at one node");
    add_common(bound);
    bound->add_option("--node-at", ov.node_at, "evaluate at the node nearest x,y");
    CLI::App* dump =
        app.add_subcommand("forward-dump", "dump geometries and system matrices");
    add_common(dump);

    CLI11_PARSE(app, argc, argv);

    Command command = Command::demo;
    if (track->parsed()) command = Command::track;
    else if (hitmap->parsed()) command = Command::hitmap;
    else if (sweep->parsed()) command = Command::snr_sweep;
    else if (bound->parsed()) command = Command::bound;
    else if (dump->parsed()) command = Command::forward_dump;

    try {
        RunConfig cfg = effective_config(ov);
        std::optional<json> report = dispatch(cfg, command);
        if (report) std::printf("%s\n", report->dump(2).c_str());
    } catch (const std::exception& e) {
        stdloc::log_error("%s", e.what());
        return 1;
    }
    return 0;
}
