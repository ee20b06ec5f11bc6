#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "stdloc/errors.hpp"
#include "stdloc/linalg.hpp"

namespace stdloc {

inline constexpr double kBoundaryMargin = 1e-3;  // keeps image sources finite
inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class OrientationMode { radial, tangential, fixed_angle };

inline std::string to_string(OrientationMode m) {
    switch (m) {
        case OrientationMode::radial: return "radial";
        case OrientationMode::tangential: return "tangential";
        case OrientationMode::fixed_angle: return "fixed_angle";
    }
    return "radial";
}

// Node layout, sensor ring positions and per-node dipole orientations for the
// unit conductivity disk.
struct DiskGeometry {
    std::vector<Vector2> nodes;         // strictly inside the unit disk
    std::vector<Vector2> sensors;       // on the unit circle
    std::vector<Vector2> orientations;  // unit dipole direction per node
    double mesh_spacing = 0.0;          // grid pitch

    int node_count() const { return static_cast<int>(nodes.size()); }
    int sensor_count() const { return static_cast<int>(sensors.size()); }

    void validate() const {
        if (nodes.size() < 2)
            throw validation_error("DiskGeometry: need at least 2 nodes");
        if (sensors.size() < 2)
            throw validation_error("DiskGeometry: need at least 2 sensors");
        if (orientations.size() != nodes.size())
            throw validation_error("DiskGeometry: one orientation per node required");
        if (!(mesh_spacing > 0.0))
            throw validation_error("DiskGeometry: mesh_spacing must be positive");
        for (const auto& p : nodes)
            if (!(p.norm() < 1.0 - kBoundaryMargin))
                throw validation_error("DiskGeometry: node too close to the boundary");
        for (const auto& s : sensors)
            if (std::abs(s.norm() - 1.0) > 1e-12)
                throw validation_error("DiskGeometry: sensor not on the unit circle");
        for (const auto& o : orientations)
            if (std::abs(o.norm() - 1.0) > 1e-12)
                throw validation_error("DiskGeometry: orientation not unit length");
    }

    int nearest_node(const Vector2& p) const {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int k = 0; k < node_count(); ++k) {
            double d = (nodes[k] - p).norm();
            if (d < bd) {
                bd = d;
                best = k;
            }
        }
        return best;
    }

    double distance_to_sensors(const Vector2& p) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : sensors) best = std::min(best, (s - p).norm());
        return best;
    }
};

inline Vector2 orientation_at(const Vector2& node, OrientationMode mode,
                              double fixed_angle_rad) {
    switch (mode) {
        case OrientationMode::radial: {
            double r = node.norm();
            if (r < 1e-12) return Vector2(1.0, 0.0);
            return node / r;
        }
        case OrientationMode::tangential: {
            double r = node.norm();
            if (r < 1e-12) return Vector2(1.0, 0.0);
            return Vector2(-node.y(), node.x()) / r;
        }
        case OrientationMode::fixed_angle:
            return Vector2(std::cos(fixed_angle_rad), std::sin(fixed_angle_rad));
    }
    return Vector2(1.0, 0.0);
}

// Regular Cartesian grid clipped to radius 1 - margin. The pitch is scanned
// around the equal-area estimate and the candidate whose clipped node count
// is closest to the target wins; ties pick the coarser pitch. `offset` shifts
// the lattice by a fraction of the pitch in both coordinates, which is how
// the inverse grid is kept disjoint from the forward grid.
inline void fill_grid_nodes(int node_count_target, double offset,
                            std::vector<Vector2>& nodes, double& pitch) {
    if (node_count_target < 2)
        throw validation_error("build_disk_geometry: node_count_target must be >= 2");
    const double clip = 1.0 - kBoundaryMargin;
    const double h0 = std::sqrt(kPi / static_cast<double>(node_count_target)) * clip;
    double best_h = -1.0;
    long long best_diff = -1;
    for (int k = -300; k <= 300; ++k) {
        double h = h0 * (1.0 + 0.001 * static_cast<double>(k));
        if (h <= 0.0) continue;
        int range = static_cast<int>(std::floor(clip / h)) + 2;
        long long count = 0;
        for (int i = -range; i <= range; ++i) {
            double x = (static_cast<double>(i) + offset) * h;
            for (int j = -range; j <= range; ++j) {
                double y = (static_cast<double>(j) + offset) * h;
                if (x * x + y * y < clip * clip) ++count;
            }
        }
        long long diff = std::llabs(count - node_count_target);
        if (best_diff < 0 || diff < best_diff ||
            (diff == best_diff && h > best_h)) {
            best_diff = diff;
            best_h = h;
        }
    }
    nodes.clear();
    int range = static_cast<int>(std::floor(clip / best_h)) + 2;
    for (int i = -range; i <= range; ++i) {
        double x = (static_cast<double>(i) + offset) * best_h;
        for (int j = -range; j <= range; ++j) {
            double y = (static_cast<double>(j) + offset) * best_h;
            if (x * x + y * y < clip * clip) nodes.emplace_back(x, y);
        }
    }
    if (nodes.empty())
        throw validation_error("build_disk_geometry: clipped grid is empty");
    pitch = best_h;
}

inline std::vector<Vector2> sensors_on_arc(int sensor_count, double arc_begin,
                                           double arc_end) {
    if (sensor_count < 2)
        throw validation_error("build_disk_geometry: sensor_count must be >= 2");
    if (!(arc_end > arc_begin))
        throw validation_error("build_disk_geometry: sensor arc is degenerate");
    std::vector<Vector2> sensors;
    sensors.reserve(sensor_count);
    const double span = arc_end - arc_begin;
    const bool full_circle = std::abs(span - 2.0 * kPi) < 1e-12;
    for (int i = 0; i < sensor_count; ++i) {
        double t = full_circle
                       ? arc_begin + span * static_cast<double>(i) / sensor_count
                       : arc_begin + span * static_cast<double>(i) / (sensor_count - 1);
        sensors.emplace_back(std::cos(t), std::sin(t));
    }
    return sensors;
}

// `grid_offset` defaults to 0 (forward layout); pass 0.5 for the staggered
// inverse layout so the two grids cannot share a single coordinate.
inline DiskGeometry build_disk_geometry(int node_count_target, int sensor_count,
                                        double arc_begin, double arc_end,
                                        OrientationMode mode,
                                        double fixed_angle_rad = 0.0,
                                        double grid_offset = 0.0) {
    DiskGeometry g;
    fill_grid_nodes(node_count_target, grid_offset, g.nodes, g.mesh_spacing);
    g.sensors = sensors_on_arc(sensor_count, arc_begin, arc_end);
    g.orientations.reserve(g.nodes.size());
    for (const auto& p : g.nodes)
        g.orientations.push_back(orientation_at(p, mode, fixed_angle_rad));
    g.validate();
    return g;
}

// Exact coordinate collision check between two node sets (inverse-crime guard).
inline int shared_node_count(const DiskGeometry& a, const DiskGeometry& b) {
    int shared = 0;
    for (const auto& p : a.nodes)
        for (const auto& q : b.nodes)
            if (p.x() == q.x() && p.y() == q.y()) ++shared;
    return shared;
}

} // namespace stdloc
