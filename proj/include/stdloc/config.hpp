#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stdloc/errors.hpp"
#include "stdloc/experiments.hpp"
#include "stdloc/geometry.hpp"
#include "stdloc/io.hpp"
#include "stdloc/linalg.hpp"

namespace stdloc {

enum class PriorKind { scalar, diagonal, matrix_file };

struct PriorSpec {
    PriorKind kind = PriorKind::scalar;
    double delta = 1.0;                // scalar prior Gamma = delta * I
    std::vector<double> diagonal;      // diagonal prior
    std::string matrix_path;           // CSV file with a full SPD matrix
    Matrix matrix;                     // loaded eagerly when kind == matrix_file
};

struct GeometryConfig {
    int forward_nodes = 650;
    int inverse_nodes = 455;
    int sensors = 16;
    double arc_begin = 0.0;
    double arc_end = kPi;
    OrientationMode orientation = OrientationMode::radial;
    double fixed_angle_rad = 0.0;
};

struct DemoConfig {
    Vector2 source{0.2, 0.6};
    double model_noise_percent = 5.0;
};

struct TrackingConfig {
    double process_noise = 0.1;
    double noise_percent = 5.0;
    Vector2 far_source{0.0, -0.95};
    Vector2 near_source{-0.4, 0.8};
    double duration = 0.025;
    double dt = 0.001;
    double localization_start = 0.006;
    int seeds = 5;  // number of replicate seeds summarized by the track command
    // Constant orientation keeps both grids consistent and the deep source
    // visible; radial dipoles are nearly silent next to the boundary.
    OrientationMode orientation = OrientationMode::fixed_angle;
    double fixed_angle_rad = 0.0;
};

struct HitmapConfig {
    double noise_percent = 5.0;
    int samples_per_node = 1000;
};

struct SweepConfig {
    std::vector<Vector2> points = default_sweep_points();
    std::vector<double> noise_grid = default_noise_grid();
    int samples = 1000;
};

struct BoundConfig {
    Vector2 node_at{0.0, 0.9};
    double noise_percent = 5.0;
};

struct RunConfig {
    GeometryConfig geometry;
    PriorSpec prior;
    double noise_percent = 5.0;  // generic noise level, overridable per command
    DemoConfig demo;
    TrackingConfig tracking;
    HitmapConfig hitmap;
    SweepConfig sweep;
    BoundConfig bound;
    std::uint64_t seed = 42;
    std::string output_dir = "out";
    int workers = 0;  // 0 = available parallelism
    bool overwrite = false;
};

// Materializes the prior covariance for an n-node inverse grid; rejects
// diagonal/matrix priors whose dimension does not match the grid.
inline Matrix prior_matrix(const PriorSpec& prior, int n) {
    switch (prior.kind) {
        case PriorKind::scalar:
            return prior.delta * Matrix::Identity(n, n);
        case PriorKind::diagonal: {
            if (static_cast<int>(prior.diagonal.size()) != n)
                throw config_error("config: 'model.prior.values' has length " +
                                   std::to_string(prior.diagonal.size()) +
                                   " but the inverse grid has " + std::to_string(n) +
                                   " nodes");
            Vector d(n);
            for (int i = 0; i < n; ++i) d[i] = prior.diagonal[i];
            return Matrix(d.asDiagonal());
        }
        case PriorKind::matrix_file:
            if (prior.matrix.rows() != n)
                throw config_error("config: 'model.prior.path' matrix is " +
                                   std::to_string(prior.matrix.rows()) + "x" +
                                   std::to_string(prior.matrix.cols()) +
                                   " but the inverse grid has " + std::to_string(n) +
                                   " nodes");
            return prior.matrix;
    }
    throw config_error("config: 'model.prior': unsupported prior kind");
}

namespace detail {

inline void require_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw config_error("config: unknown key '" +
                               (path.empty() ? it.key() : path + "." + it.key()) +
                               "'");
}

inline double get_number(const json& obj, const std::string& key,
                         const std::string& path, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number())
        throw config_error("config: '" + path + "." + key + "' must be a number");
    return v.get<double>();
}

inline int get_int(const json& obj, const std::string& key, const std::string& path,
                   int fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw config_error("config: '" + path + "." + key + "' must be an integer");
    return v.get<int>();
}

inline Vector2 get_point(const json& obj, const std::string& key,
                         const std::string& path, const Vector2& fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw config_error("config: '" + path + "." + key +
                           "' must be an [x, y] pair");
    return Vector2(v[0].get<double>(), v[1].get<double>());
}

inline OrientationMode parse_orientation(const json& obj, const std::string& key,
                                         const std::string& path,
                                         OrientationMode fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string())
        throw config_error("config: '" + path + "." + key + "' must be a string");
    std::string s = v.get<std::string>();
    if (s == "radial") return OrientationMode::radial;
    if (s == "tangential") return OrientationMode::tangential;
    if (s == "fixed_angle") return OrientationMode::fixed_angle;
    throw config_error("config: '" + path + "." + key +
                       "' must be one of radial|tangential|fixed_angle");
}

inline void parse_prior(const json& obj, PriorSpec& prior) {
    require_keys(obj, "model.prior", {"type", "delta", "values", "path"});
    if (!obj.contains("type"))
        throw config_error("config: 'model.prior.type' is required when a prior "
                           "object is given");
    std::string type = obj.at("type").is_string()
                           ? obj.at("type").get<std::string>()
                           : throw config_error(
                                 "config: 'model.prior.type' must be a string");
    if (type == "scalar") {
        prior.kind = PriorKind::scalar;
        prior.delta = get_number(obj, "delta", "model.prior", 1.0);
        if (!(prior.delta > 0.0))
            throw config_error("config: 'model.prior.delta' must be > 0");
    } else if (type == "diagonal") {
        prior.kind = PriorKind::diagonal;
        if (!obj.contains("values") || !obj.at("values").is_array())
            throw config_error("config: 'model.prior.values' must be an array");
        prior.diagonal.clear();
        for (const auto& v : obj.at("values")) {
            if (!v.is_number() || !(v.get<double>() > 0.0))
                throw config_error("config: 'model.prior.values' entries must be "
                                   "positive numbers");
            prior.diagonal.push_back(v.get<double>());
        }
    } else if (type == "matrix_file") {
        prior.kind = PriorKind::matrix_file;
        if (!obj.contains("path") || !obj.at("path").is_string())
            throw config_error("config: 'model.prior.path' must be a string");
        prior.matrix_path = obj.at("path").get<std::string>();
        prior.matrix = load_csv_matrix(prior.matrix_path);
        if (prior.matrix.rows() != prior.matrix.cols())
            throw config_error("config: 'model.prior.path' matrix must be square, got " +
                               std::to_string(prior.matrix.rows()) + "x" +
                               std::to_string(prior.matrix.cols()));
    } else {
        throw config_error("config: 'model.prior.type' must be one of "
                           "scalar|diagonal|matrix_file");
    }
}

} // namespace detail

inline RunConfig parse_config_json(const json& doc) {
    if (!doc.is_object())
        throw config_error("config: top level must be a JSON object");
    RunConfig cfg;
    detail::require_keys(doc, "",
                         {"geometry", "model", "demo", "tracking", "hitmap",
                          "snr_sweep", "bound", "seed", "output_dir", "workers",
                          "overwrite"});

    if (doc.contains("geometry")) {
        const json& g = doc.at("geometry");
        if (!g.is_object()) throw config_error("config: 'geometry' must be an object");
        detail::require_keys(g, "geometry",
                             {"forward_nodes", "inverse_nodes", "sensors",
                              "arc_begin", "arc_end", "orientation",
                              "fixed_angle_rad"});
        cfg.geometry.forward_nodes =
            detail::get_int(g, "forward_nodes", "geometry", cfg.geometry.forward_nodes);
        cfg.geometry.inverse_nodes =
            detail::get_int(g, "inverse_nodes", "geometry", cfg.geometry.inverse_nodes);
        cfg.geometry.sensors = detail::get_int(g, "sensors", "geometry",
                                               cfg.geometry.sensors);
        cfg.geometry.arc_begin =
            detail::get_number(g, "arc_begin", "geometry", cfg.geometry.arc_begin);
        cfg.geometry.arc_end =
            detail::get_number(g, "arc_end", "geometry", cfg.geometry.arc_end);
        cfg.geometry.orientation = detail::parse_orientation(
            g, "orientation", "geometry", cfg.geometry.orientation);
        cfg.geometry.fixed_angle_rad = detail::get_number(
            g, "fixed_angle_rad", "geometry", cfg.geometry.fixed_angle_rad);
        if (cfg.geometry.forward_nodes < 2 || cfg.geometry.inverse_nodes < 2)
            throw config_error("config: 'geometry.forward_nodes' and "
                               "'geometry.inverse_nodes' must be >= 2");
        if (cfg.geometry.sensors < 2)
            throw config_error("config: 'geometry.sensors' must be >= 2");
    }

    if (doc.contains("model")) {
        const json& m = doc.at("model");
        if (!m.is_object()) throw config_error("config: 'model' must be an object");
        detail::require_keys(m, "model", {"prior", "noise_percent"});
        if (m.contains("prior")) {
            if (!m.at("prior").is_object())
                throw config_error("config: 'model.prior' must be an object");
            detail::parse_prior(m.at("prior"), cfg.prior);
        }
        cfg.noise_percent =
            detail::get_number(m, "noise_percent", "model", cfg.noise_percent);
        if (cfg.noise_percent < 0.0 || cfg.noise_percent >= 100.0)
            throw config_error("config: 'model.noise_percent' must lie in [0, 100)");
        cfg.hitmap.noise_percent = cfg.noise_percent;
        cfg.tracking.noise_percent = cfg.noise_percent;
        cfg.bound.noise_percent = cfg.noise_percent;
    }

    if (doc.contains("demo")) {
        const json& d = doc.at("demo");
        if (!d.is_object()) throw config_error("config: 'demo' must be an object");
        detail::require_keys(d, "demo", {"source", "model_noise_percent"});
        cfg.demo.source = detail::get_point(d, "source", "demo", cfg.demo.source);
        cfg.demo.model_noise_percent = detail::get_number(
            d, "model_noise_percent", "demo", cfg.demo.model_noise_percent);
        if (!(cfg.demo.model_noise_percent > 0.0))
            throw config_error("config: 'demo.model_noise_percent' must be > 0");
    }

    if (doc.contains("tracking")) {
        const json& t = doc.at("tracking");
        if (!t.is_object()) throw config_error("config: 'tracking' must be an object");
        detail::require_keys(t, "tracking",
                             {"process_noise", "noise_percent", "far_source",
                              "near_source", "duration", "dt",
                              "localization_start", "seeds", "orientation",
                              "fixed_angle_rad"});
        cfg.tracking.process_noise = detail::get_number(
            t, "process_noise", "tracking", cfg.tracking.process_noise);
        cfg.tracking.noise_percent = detail::get_number(
            t, "noise_percent", "tracking", cfg.tracking.noise_percent);
        cfg.tracking.far_source =
            detail::get_point(t, "far_source", "tracking", cfg.tracking.far_source);
        cfg.tracking.near_source =
            detail::get_point(t, "near_source", "tracking", cfg.tracking.near_source);
        cfg.tracking.duration =
            detail::get_number(t, "duration", "tracking", cfg.tracking.duration);
        cfg.tracking.dt = detail::get_number(t, "dt", "tracking", cfg.tracking.dt);
        cfg.tracking.localization_start = detail::get_number(
            t, "localization_start", "tracking", cfg.tracking.localization_start);
        cfg.tracking.seeds = detail::get_int(t, "seeds", "tracking",
                                             cfg.tracking.seeds);
        cfg.tracking.orientation = detail::parse_orientation(
            t, "orientation", "tracking", cfg.tracking.orientation);
        cfg.tracking.fixed_angle_rad = detail::get_number(
            t, "fixed_angle_rad", "tracking", cfg.tracking.fixed_angle_rad);
        if (cfg.tracking.process_noise < 0.0)
            throw config_error("config: 'tracking.process_noise' must be >= 0");
        if (cfg.tracking.seeds < 1)
            throw config_error("config: 'tracking.seeds' must be >= 1");
    }

    if (doc.contains("hitmap")) {
        const json& h = doc.at("hitmap");
        if (!h.is_object()) throw config_error("config: 'hitmap' must be an object");
        detail::require_keys(h, "hitmap", {"noise_percent", "samples_per_node"});
        cfg.hitmap.noise_percent = detail::get_number(h, "noise_percent", "hitmap",
                                                      cfg.hitmap.noise_percent);
        cfg.hitmap.samples_per_node = detail::get_int(
            h, "samples_per_node", "hitmap", cfg.hitmap.samples_per_node);
        if (cfg.hitmap.samples_per_node < 1)
            throw config_error("config: 'hitmap.samples_per_node' must be >= 1");
        if (cfg.hitmap.noise_percent < 0.0 || cfg.hitmap.noise_percent >= 100.0)
            throw config_error("config: 'hitmap.noise_percent' must lie in [0, 100)");
    }

    if (doc.contains("snr_sweep")) {
        const json& s = doc.at("snr_sweep");
        if (!s.is_object())
            throw config_error("config: 'snr_sweep' must be an object");
        detail::require_keys(s, "snr_sweep", {"points", "noise_grid", "samples"});
        if (s.contains("points")) {
            if (!s.at("points").is_array())
                throw config_error("config: 'snr_sweep.points' must be an array");
            cfg.sweep.points.clear();
            for (const auto& p : s.at("points")) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() ||
                    !p[1].is_number())
                    throw config_error("config: 'snr_sweep.points' entries must be "
                                       "[x, y] pairs");
                cfg.sweep.points.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
        }
        if (s.contains("noise_grid")) {
            if (!s.at("noise_grid").is_array())
                throw config_error("config: 'snr_sweep.noise_grid' must be an array");
            cfg.sweep.noise_grid.clear();
            for (const auto& p : s.at("noise_grid")) {
                if (!p.is_number() || !(p.get<double>() > 0.0) ||
                    !(p.get<double>() < 100.0))
                    throw config_error("config: 'snr_sweep.noise_grid' entries must "
                                       "lie in (0, 100)");
                cfg.sweep.noise_grid.push_back(p.get<double>());
            }
        }
        cfg.sweep.samples =
            detail::get_int(s, "samples", "snr_sweep", cfg.sweep.samples);
        if (cfg.sweep.samples < 1)
            throw config_error("config: 'snr_sweep.samples' must be >= 1");
    }

    if (doc.contains("bound")) {
        const json& b = doc.at("bound");
        if (!b.is_object()) throw config_error("config: 'bound' must be an object");
        detail::require_keys(b, "bound", {"node_at", "noise_percent"});
        cfg.bound.node_at = detail::get_point(b, "node_at", "bound", cfg.bound.node_at);
        cfg.bound.noise_percent = detail::get_number(b, "noise_percent", "bound",
                                                     cfg.bound.noise_percent);
        if (!(cfg.bound.noise_percent > 0.0) || cfg.bound.noise_percent >= 100.0)
            throw config_error("config: 'bound.noise_percent' must lie in (0, 100)");
    }

    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        // Text parses store nonnegative literals as unsigned, but documents
        // built in memory may carry them as signed integers; accept both.
        if (!s.is_number_unsigned() &&
            !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
            throw config_error("config: 'seed' must be a nonnegative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string())
            throw config_error("config: 'output_dir' must be a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }
    if (doc.contains("workers")) {
        cfg.workers = detail::get_int(doc, "workers", "", cfg.workers);
        if (cfg.workers < 0)
            throw config_error("config: 'workers' must be >= 0");
    }
    if (doc.contains("overwrite")) {
        if (!doc.at("overwrite").is_boolean())
            throw config_error("config: 'overwrite' must be a boolean");
        cfg.overwrite = doc.at("overwrite").get<bool>();
    }
    return cfg;
}

inline RunConfig parse_config(const std::optional<std::string>& path) {
    if (!path) return RunConfig{};
    std::ifstream in(*path);
    if (!in) throw config_error("config: cannot open file " + *path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("config: malformed JSON in " + *path + ": " + e.what());
    }
    return parse_config_json(doc);
}

inline json prior_echo(const PriorSpec& p) {
    switch (p.kind) {
        case PriorKind::scalar:
            return json{{"type", "scalar"}, {"delta", p.delta}};
        case PriorKind::diagonal:
            return json{{"type", "diagonal"}, {"values", p.diagonal}};
        case PriorKind::matrix_file:
            return json{{"type", "matrix_file"},
                        {"path", p.matrix_path},
                        {"rows", p.matrix.rows()}};
    }
    return json{};
}

// Effective configuration echo used in every manifest.
inline json config_echo(const RunConfig& c) {
    return json{
        {"geometry",
         {{"forward_nodes", c.geometry.forward_nodes},
          {"inverse_nodes", c.geometry.inverse_nodes},
          {"sensors", c.geometry.sensors},
          {"arc_begin", c.geometry.arc_begin},
          {"arc_end", c.geometry.arc_end},
          {"orientation", to_string(c.geometry.orientation)},
          {"fixed_angle_rad", c.geometry.fixed_angle_rad}}},
        {"model",
         {{"prior", prior_echo(c.prior)}, {"noise_percent", c.noise_percent}}},
        {"demo",
         {{"source", {c.demo.source.x(), c.demo.source.y()}},
          {"model_noise_percent", c.demo.model_noise_percent}}},
        {"tracking",
         {{"process_noise", c.tracking.process_noise},
          {"noise_percent", c.tracking.noise_percent},
          {"far_source", {c.tracking.far_source.x(), c.tracking.far_source.y()}},
          {"near_source", {c.tracking.near_source.x(), c.tracking.near_source.y()}},
          {"duration", c.tracking.duration},
          {"dt", c.tracking.dt},
          {"localization_start", c.tracking.localization_start},
          {"seeds", c.tracking.seeds},
          {"orientation", to_string(c.tracking.orientation)},
          {"fixed_angle_rad", c.tracking.fixed_angle_rad}}},
        {"hitmap",
         {{"noise_percent", c.hitmap.noise_percent},
          {"samples_per_node", c.hitmap.samples_per_node}}},
        {"snr_sweep",
         {{"points",
           [&] {
               json pts = json::array();
               for (const auto& p : c.sweep.points)
                   pts.push_back({p.x(), p.y()});
               return pts;
           }()},
          {"noise_grid", c.sweep.noise_grid},
          {"samples", c.sweep.samples}}},
        {"bound",
         {{"node_at", {c.bound.node_at.x(), c.bound.node_at.y()}},
          {"noise_percent", c.bound.noise_percent}}},
        {"seed", c.seed},
        {"output_dir", c.output_dir},
        {"workers", c.workers},
        {"overwrite", c.overwrite}};
}

} // namespace stdloc
