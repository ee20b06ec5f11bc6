#pragma once

// Implements the six CLI commands against a validated RunConfig. Lives in the
// library (rather than the binary) so tests can drive the exact same code
// paths and compare output files byte for byte.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stdloc/bounds.hpp"
#include "stdloc/config.hpp"
#include "stdloc/experiments.hpp"
#include "stdloc/io.hpp"

namespace stdloc {

enum class Command { demo, track, hitmap, snr_sweep, bound, forward_dump };

inline std::string to_string(Command c) {
    switch (c) {
        case Command::demo: return "demo";
        case Command::track: return "track";
        case Command::hitmap: return "hitmap";
        case Command::snr_sweep: return "snr-sweep";
        case Command::bound: return "bound";
        case Command::forward_dump: return "forward-dump";
    }
    return "?";
}

namespace detail {

inline GeometryPair command_geometry(const RunConfig& cfg) {
    return make_geometry_pair(cfg.geometry.forward_nodes, cfg.geometry.inverse_nodes,
                              cfg.geometry.sensors, cfg.geometry.arc_begin,
                              cfg.geometry.arc_end, cfg.geometry.orientation,
                              cfg.geometry.fixed_angle_rad);
}

inline double require_scalar_prior(const RunConfig& cfg, const char* command) {
    if (cfg.prior.kind != PriorKind::scalar)
        throw config_error(std::string("config: 'model.prior': the ") + command +
                           " command supports scalar priors only");
    return cfg.prior.delta;
}

inline std::vector<std::string> grid_row(const Vector2& p, double v) {
    return {fmt_double(p.x()), fmt_double(p.y()), fmt_double(v)};
}

inline json reconstruction_json(const char* kind, const Vector& values,
                                int argmax) {
    json vals = json::array();
    for (int i = 0; i < values.size(); ++i) vals.push_back(values[i]);
    return json{{"kind", kind}, {"values", vals}, {"argmax_set", {argmax}}};
}

} // namespace detail

inline void run_demo_command(const RunConfig& cfg) {
    double delta = detail::require_scalar_prior(cfg, "demo");
    GeometryPair g = detail::command_geometry(cfg);
    FarFieldDemoResult r =
        run_far_field_demo(g, cfg.demo.source, cfg.noise_percent,
                           cfg.demo.model_noise_percent, delta, cfg.seed);
    OutputWriter w(std::filesystem::path(cfg.output_dir) / "demo", cfg.overwrite);

    std::vector<std::vector<std::string>> bmne_rows, slo_rows;
    for (int k = 0; k < g.inverse.node_count(); ++k) {
        bmne_rows.push_back(detail::grid_row(g.inverse.nodes[k], r.bmne[k]));
        slo_rows.push_back(detail::grid_row(g.inverse.nodes[k], r.sloreta[k]));
    }
    w.write_csv("bmne.csv", {"x", "y", "value"}, bmne_rows);
    w.write_csv("sloreta.csv", {"x", "y", "value"}, slo_rows);

    std::vector<std::vector<std::string>> meas_rows;
    for (int i = 0; i < g.inverse.sensor_count(); ++i)
        meas_rows.push_back({fmt_int(i), fmt_double(g.inverse.sensors[i].x()),
                             fmt_double(g.inverse.sensors[i].y()),
                             fmt_double(r.measurements[i])});
    w.write_csv("measurements.csv", {"sensor", "x", "y", "value"}, meas_rows);

    w.write_json("reconstructions.json",
                 json{{"bmne",
                       detail::reconstruction_json("bmne", r.bmne, r.bmne_argmax)},
                      {"sloreta", detail::reconstruction_json(
                                      "standardized", r.sloreta, r.sloreta_argmax)}});

    json summary{
        {"source", {r.source.x(), r.source.y()}},
        {"moment", {r.moment.x(), r.moment.y()}},
        {"noise_percent", r.noise_percent},
        {"sigma_model", r.sigma_model},
        {"bmne_argmax", r.bmne_argmax},
        {"sloreta_argmax", r.sloreta_argmax},
        {"nearest_node", r.nearest_node},
        {"bmne_argmax_position",
         {g.inverse.nodes[r.bmne_argmax].x(), g.inverse.nodes[r.bmne_argmax].y()}},
        {"sloreta_argmax_position",
         {g.inverse.nodes[r.sloreta_argmax].x(),
          g.inverse.nodes[r.sloreta_argmax].y()}},
        {"bmne_argmax_dist_to_sensors",
         g.inverse.distance_to_sensors(g.inverse.nodes[r.bmne_argmax])},
        {"source_dist_to_sensors", g.inverse.distance_to_sensors(r.source)},
        {"mesh_spacing", g.inverse.mesh_spacing}};
    w.write_json("summary.json", summary);
    w.write_json("manifest.json", make_manifest("demo", config_echo(cfg), cfg.seed));
}

inline void run_track_command(const RunConfig& cfg) {
    double delta = detail::require_scalar_prior(cfg, "track");
    GeometryPair g = make_geometry_pair(
        cfg.geometry.forward_nodes, cfg.geometry.inverse_nodes, cfg.geometry.sensors,
        cfg.geometry.arc_begin, cfg.geometry.arc_end, cfg.tracking.orientation,
        cfg.tracking.fixed_angle_rad);
    TrackingScenario sc;
    sc.far_source = cfg.tracking.far_source;
    sc.near_source = cfg.tracking.near_source;
    sc.duration = cfg.tracking.duration;
    sc.dt = cfg.tracking.dt;
    sc.localization_start = cfg.tracking.localization_start;
    sc.noise_percent = cfg.tracking.noise_percent;

    OutputWriter w(std::filesystem::path(cfg.output_dir) / "track", cfg.overwrite);

    Matrix true_tracks = simulate_true_tracks(sc);
    std::vector<std::vector<std::string>> true_rows;
    for (int t = 0; t < sc.steps(); ++t)
        true_rows.push_back({fmt_double((t + 1) * sc.dt),
                             fmt_double(true_tracks(0, t)),
                             fmt_double(true_tracks(1, t))});

    std::vector<std::vector<std::string>> summary_rows, gmm_rows, loc_rows,
        track_rows, value_rows;
    for (int si = 0; si < cfg.tracking.seeds; ++si) {
        std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(si);
        TrackingResult res =
            run_tracking(g, sc, delta, cfg.tracking.process_noise, seed);
        for (const auto& mres : res.methods) {
            summary_rows.push_back(
                {fmt_int(si), std::to_string(seed), mres.method,
                 fmt_double(mres.near_error), fmt_double(mres.far_error),
                 fmt_double(mres.far_cluster_dist_to_sensors),
                 fmt_double(mres.true_far_dist_to_sensors),
                 fmt_double(mres.near_track_corr), fmt_double(res.mesh_spacing)});
            for (int c = 0; c < 2; ++c) {
                const GmmComponent& gc = mres.gmm.components[c];
                gmm_rows.push_back({fmt_int(si), mres.method, fmt_int(c),
                                    fmt_double(gc.weight), fmt_double(gc.mean.x()),
                                    fmt_double(gc.mean.y()), fmt_double(gc.cov(0, 0)),
                                    fmt_double(gc.cov(0, 1)), fmt_double(gc.cov(1, 1)),
                                    fmt_double(mres.gmm.ellipse_level),
                                    fmt_int(c == mres.near_component ? 1 : 0)});
            }
            for (std::size_t i = 0; i < mres.localization_times.size(); ++i) {
                const Vector2& pmax = g.inverse.nodes[mres.max_nodes[i]];
                const Vector2& pmin = g.inverse.nodes[mres.min_nodes[i]];
                loc_rows.push_back({fmt_int(si), mres.method,
                                    fmt_double(mres.localization_times[i]),
                                    fmt_int(mres.max_nodes[i]), fmt_double(pmax.x()),
                                    fmt_double(pmax.y()), fmt_int(mres.min_nodes[i]),
                                    fmt_double(pmin.x()), fmt_double(pmin.y())});
            }
            for (int t = 0; t < sc.steps(); ++t)
                track_rows.push_back(
                    {fmt_int(si), mres.method, fmt_double((t + 1) * sc.dt),
                     fmt_double(mres.track_far[t]), fmt_double(mres.track_near[t])});
            if (si == 0)
                for (int t = 0; t < sc.steps(); ++t)
                    for (int k = 0; k < g.inverse.node_count(); ++k)
                        value_rows.push_back({mres.method, fmt_double((t + 1) * sc.dt),
                                              fmt_int(k),
                                              fmt_double(mres.values(t, k))});
        }
    }
    w.write_csv("true_tracks.csv", {"t", "far", "near"}, true_rows);
    w.write_csv("summary.csv",
                {"replicate", "seed", "method", "near_error", "far_error",
                 "far_cluster_dist_to_sensors", "true_far_dist_to_sensors",
                 "near_track_corr", "mesh_spacing"},
                summary_rows);
    w.write_csv("gmm.csv",
                {"replicate", "method", "component", "weight", "mean_x", "mean_y",
                 "cov_xx", "cov_xy", "cov_yy", "ellipse_level", "is_near"},
                gmm_rows);
    w.write_csv("localizations.csv",
                {"replicate", "method", "t", "max_node", "max_x", "max_y",
                 "min_node", "min_x", "min_y"},
                loc_rows);
    w.write_csv("tracks.csv", {"replicate", "method", "t", "track_far", "track_near"},
                track_rows);
    w.write_csv("values.csv", {"method", "t", "node", "value"}, value_rows);
    w.write_json("manifest.json", make_manifest("track", config_echo(cfg), cfg.seed));
}

inline void run_hitmap_command(const RunConfig& cfg) {
    double delta = detail::require_scalar_prior(cfg, "hitmap");
    GeometryPair g = detail::command_geometry(cfg);
    HitRateMap map =
        run_spatial_hit_rate(g, cfg.hitmap.noise_percent, cfg.hitmap.samples_per_node,
                             delta, cfg.seed, cfg.workers);
    OutputWriter w(std::filesystem::path(cfg.output_dir) / "hitmap", cfg.overwrite);

    std::vector<std::vector<std::string>> rows, rate_rows, bound_rows;
    for (int k = 0; k < g.inverse.node_count(); ++k) {
        const Vector2& p = g.inverse.nodes[k];
        rows.push_back({fmt_int(k), fmt_double(p.x()), fmt_double(p.y()),
                        fmt_int(map.samples_per_node), fmt_int(map.hits[k]),
                        fmt_double(map.rate[k]), fmt_double(map.near_rate[k]),
                        fmt_double(map.bound[k])});
        rate_rows.push_back(detail::grid_row(p, map.rate[k]));
        bound_rows.push_back(detail::grid_row(p, map.bound[k]));
    }
    w.write_csv("rates.csv",
                {"node", "x", "y", "samples", "hits", "rate", "near_rate", "bound"},
                rows);
    w.write_csv("rate_grid.csv", {"x", "y", "value"}, rate_rows);
    w.write_csv("bound_grid.csv", {"x", "y", "value"}, bound_rows);
    w.write_json("manifest.json", make_manifest("hitmap", config_echo(cfg), cfg.seed));
}

inline void run_sweep_command(const RunConfig& cfg) {
    double delta = detail::require_scalar_prior(cfg, "snr-sweep");
    GeometryPair g = detail::command_geometry(cfg);
    SnrSweepResult res = run_snr_sweep(g, cfg.sweep.points, cfg.sweep.noise_grid,
                                       cfg.sweep.samples, delta, cfg.seed,
                                       cfg.workers);
    OutputWriter w(std::filesystem::path(cfg.output_dir) / "snr-sweep",
                   cfg.overwrite);

    std::vector<std::vector<std::string>> curve_rows, div_rows;
    for (const auto& c : res.curves) {
        for (std::size_t i = 0; i < res.noise_grid.size(); ++i)
            curve_rows.push_back(
                {fmt_double(c.requested.x()), fmt_double(c.requested.y()),
                 fmt_int(c.node_index), fmt_double(c.node.x()), fmt_double(c.node.y()),
                 fmt_double(res.noise_grid[i]), fmt_double(c.rates[i]),
                 fmt_double(c.bounds[i])});
        div_rows.push_back({fmt_double(c.requested.x()), fmt_double(c.requested.y()),
                            fmt_int(c.node_index),
                            c.divergence_percent ? fmt_double(*c.divergence_percent)
                                                 : std::string("")});
    }
    w.write_csv("curves.csv",
                {"point_x", "point_y", "node", "node_x", "node_y", "noise_percent",
                 "rate", "bound"},
                curve_rows);
    w.write_csv("divergence.csv",
                {"point_x", "point_y", "node", "divergence_percent"}, div_rows);
    w.write_json("manifest.json",
                 make_manifest("snr-sweep", config_echo(cfg), cfg.seed));
}

namespace detail {

inline json bound_report_json(const BoundReport& rep, const GeometryPair& g) {
    return json{{"node", rep.node},
                {"node_position",
                 {g.inverse.nodes[rep.node].x(), g.inverse.nodes[rep.node].y()}},
                {"variant", to_string(rep.variant)},
                {"theta", rep.theta},
                {"quadratic_form", rep.quadratic_form},
                {"lambda_min_sigma", rep.lambda_min_sigma},
                {"lambda_max_sigma", rep.lambda_max_sigma},
                {"lambda_max_c", rep.lambda_max_c},
                {"probability", rep.probability},
                {"effective_m", rep.effective_m},
                {"caveat", rep.caveat}};
}

} // namespace detail

inline json run_bound_command(const RunConfig& cfg) {
    GeometryPair g = detail::command_geometry(cfg);
    const SystemMatrix& L = g.inverse_matrix;
    int k = g.inverse.nearest_node(cfg.bound.node_at);
    Vector col = L.entries.col(k);
    double sigma = noise_sigma(col, cfg.bound.noise_percent);
    if (!(sigma > 0.0))
        throw validation_error("bound: noise percent must be positive");
    Matrix noise_cov = sigma * sigma * Matrix::Identity(L.rows(), L.rows());

    std::optional<Matrix> prior;
    if (cfg.prior.kind != PriorKind::scalar || cfg.prior.delta != 1.0)
        prior = prior_matrix(cfg.prior, L.cols());
    BoundReport eigen_rep = localization_bound(k, L, noise_cov, prior);
    json doc = detail::bound_report_json(eigen_rep, g);
    doc["requested_at"] = {cfg.bound.node_at.x(), cfg.bound.node_at.y()};
    doc["noise_percent"] = cfg.bound.noise_percent;
    doc["sigma"] = sigma;
    if (cfg.prior.kind == PriorKind::scalar) {
        double snr = snr_of(L, k, cfg.bound.noise_percent);
        BoundReport snr_rep = snr_bound(k, L, noise_cov, snr);
        doc["snr_variant"] = detail::bound_report_json(snr_rep, g);
        doc["snr_variant"]["snr_db"] = snr_db(snr);
    }
    OutputWriter w(std::filesystem::path(cfg.output_dir) / "bound", cfg.overwrite);
    w.write_json("report.json", doc);
    w.write_json("manifest.json", make_manifest("bound", config_echo(cfg), cfg.seed));
    return doc;
}

inline void run_forward_dump_command(const RunConfig& cfg) {
    GeometryPair g = detail::command_geometry(cfg);
    OutputWriter w(std::filesystem::path(cfg.output_dir) / "forward-dump",
                   cfg.overwrite);

    auto geometry_json = [](const DiskGeometry& d, const SystemMatrix& L) {
        json nodes = json::array(), sensors = json::array(), orients = json::array();
        for (const auto& p : d.nodes) nodes.push_back({p.x(), p.y()});
        for (const auto& s : d.sensors) sensors.push_back({s.x(), s.y()});
        for (const auto& o : d.orientations) orients.push_back({o.x(), o.y()});
        json entries = json::array();  // row-major
        for (int i = 0; i < L.rows(); ++i)
            for (int j = 0; j < L.cols(); ++j) entries.push_back(L.entries(i, j));
        return json{{"schema_version", kSchemaVersion},
                    {"mesh_spacing", d.mesh_spacing},
                    {"nodes", nodes},
                    {"sensors", sensors},
                    {"orientations", orients},
                    {"matrix",
                     {{"rows", L.rows()}, {"cols", L.cols()}, {"entries", entries}}}};
    };
    w.write_json("forward_geometry.json", geometry_json(g.forward, g.forward_matrix));
    w.write_json("inverse_geometry.json", geometry_json(g.inverse, g.inverse_matrix));

    auto matrix_rows = [](const SystemMatrix& L) {
        std::vector<std::vector<std::string>> rows;
        for (int i = 0; i < L.rows(); ++i) {
            std::vector<std::string> row;
            row.reserve(L.cols());
            for (int j = 0; j < L.cols(); ++j)
                row.push_back(fmt_double(L.entries(i, j)));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    auto matrix_header = [](const SystemMatrix& L) {
        std::vector<std::string> h;
        h.reserve(L.cols());
        for (int j = 0; j < L.cols(); ++j) h.push_back("node" + std::to_string(j));
        return h;
    };
    w.write_csv("forward_matrix.csv", matrix_header(g.forward_matrix),
                matrix_rows(g.forward_matrix));
    w.write_csv("inverse_matrix.csv", matrix_header(g.inverse_matrix),
                matrix_rows(g.inverse_matrix));
    w.write_json("manifest.json",
                 make_manifest("forward-dump", config_echo(cfg), cfg.seed));
}

// Runs exactly one command; returns the bound report when the command is
// `bound` so callers can print it.
inline std::optional<json> dispatch(const RunConfig& cfg, Command command) {
    switch (command) {
        case Command::demo: run_demo_command(cfg); return std::nullopt;
        case Command::track: run_track_command(cfg); return std::nullopt;
        case Command::hitmap: run_hitmap_command(cfg); return std::nullopt;
        case Command::snr_sweep: run_sweep_command(cfg); return std::nullopt;
        case Command::bound: return run_bound_command(cfg);
        case Command::forward_dump: run_forward_dump_command(cfg); return std::nullopt;
    }
    throw validation_error("dispatch: unknown command");
}

} // namespace stdloc
