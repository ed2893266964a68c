// Point-cloud production from bridge meshes, three regimes:
//   * mesh-surface sampling (area-weighted, includes interior faces),
//   * simulated LiDAR from 12 realistically placeable stations (6 above
//     deck, 6 at ground level),
//   * simulated LiDAR from a dense 4-level sensor grid for near-complete
//     coverage.
// Ray casting is first-hit Moller-Trumbore over a median-split BVH.
#pragma once

#include "core.hpp"
#include "geometry.hpp"

#include <optional>

namespace bc {

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

struct LidarConfig {
    double min_range = 0.0;               // meters
    double max_range = 600.0;
    double horizontal_fov = 360.0;        // degrees
    double vertical_fov = 180.0;
    double horizontal_resolution = 0.4;   // degrees per step
    double vertical_resolution = 0.4;
};

inline void validate(const LidarConfig& c) {
    if (!(c.min_range >= 0.0 && c.min_range < c.max_range))
        throw argument_error("LidarConfig: need 0 <= min_range < max_range");
    if (!(c.horizontal_fov > 0.0 && c.vertical_fov > 0.0))
        throw argument_error("LidarConfig: fields of view must be positive");
    if (!(c.horizontal_resolution > 0.0 && c.vertical_resolution > 0.0))
        throw argument_error("LidarConfig: resolutions must be positive");
}

struct SensorPose {
    Vec3 position;
    Mat3 orientation;  // sensor frame -> world
};

// ---------------------------------------------------------------------------
// ray / triangle primitives
// ---------------------------------------------------------------------------

inline constexpr double kRayEpsilon = 1e-9;

// Moller-Trumbore. Returns the ray parameter t at the hit, or nothing.
inline std::optional<double> ray_triangle_intersect(const Vec3& origin, const Vec3& dir,
                                                    const Vec3& a, const Vec3& b,
                                                    const Vec3& c) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 pvec = dir.cross(e2);
    const double det = e1.dot(pvec);
    if (det > -kRayEpsilon && det < kRayEpsilon) return std::nullopt;  // parallel
    const double inv_det = 1.0 / det;
    const Vec3 tvec = origin - a;
    const double u = tvec.dot(pvec) * inv_det;
    if (u < -kRayEpsilon || u > 1.0 + kRayEpsilon) return std::nullopt;
    const Vec3 qvec = tvec.cross(e1);
    const double v = dir.dot(qvec) * inv_det;
    if (v < -kRayEpsilon || u + v > 1.0 + kRayEpsilon) return std::nullopt;
    return e2.dot(qvec) * inv_det;
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                                      const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));

    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

// ---------------------------------------------------------------------------
// scene acceleration
// ---------------------------------------------------------------------------

struct SceneTriangle {
    Vec3 a, b, c;
    std::uint32_t mesh_index = 0;
};

struct RayHit {
    double t = 0.0;
    std::uint32_t mesh_index = 0;
};

// Median-split BVH over the flattened triangle soup of all meshes.
class TriangleBvh {
public:
    explicit TriangleBvh(const std::vector<ComponentMesh>& meshes) {
        for (std::uint32_t mi = 0; mi < meshes.size(); ++mi)
            for (const auto& t : meshes[mi].triangles)
                tris_.push_back({meshes[mi].vertices[t[0]], meshes[mi].vertices[t[1]],
                                 meshes[mi].vertices[t[2]], mi});
        if (tris_.empty()) return;
        order_.resize(tris_.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::uint32_t>(i);
        nodes_.reserve(2 * tris_.size());
        build(0, static_cast<std::uint32_t>(tris_.size()));
    }

    bool empty() const { return tris_.empty(); }
    const std::vector<SceneTriangle>& triangles() const { return tris_; }

    // Nearest hit with t in [t_min, t_max] along the (unit) direction.
    std::optional<RayHit> first_hit(const Vec3& origin, const Vec3& dir, double t_min,
                                    double t_max) const {
        if (tris_.empty()) return std::nullopt;
        const Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
        std::optional<RayHit> best;
        double closest = t_max;
        std::uint32_t stack[64];
        int sp = 0;
        stack[sp++] = 0;
        while (sp > 0) {
            const Node& node = nodes_[stack[--sp]];
            if (!box_hit(node.box, origin, inv, t_min, closest)) continue;
            if (node.count > 0) {
                for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                    const SceneTriangle& tri = tris_[order_[i]];
                    const auto t = ray_triangle_intersect(origin, dir, tri.a, tri.b, tri.c);
                    if (t && *t >= t_min && *t <= closest) {
                        closest = *t;
                        best = RayHit{*t, tri.mesh_index};
                    }
                }
            } else {
                stack[sp++] = node.first;   // left child
                stack[sp++] = node.second;  // right child
            }
        }
        return best;
    }

private:
    struct Node {
        Aabb box;
        std::uint32_t first = 0;   // leaf: first index in order_; inner: left child
        std::uint32_t second = 0;  // inner: right child
        std::uint32_t count = 0;   // leaf iff count > 0
    };

    static bool box_hit(const Aabb& box, const Vec3& o, const Vec3& inv, double t_min,
                        double t_max) {
        for (int axis = 0; axis < 3; ++axis) {
            const double lo = (box.min[axis] - o[axis]) * inv[axis];
            const double hi = (box.max[axis] - o[axis]) * inv[axis];
            const double t0 = std::min(lo, hi);
            const double t1 = std::max(lo, hi);
            t_min = std::max(t_min, t0);
            t_max = std::min(t_max, t1);
            if (t_max < t_min) return false;
        }
        return true;
    }

    std::uint32_t build(std::uint32_t first, std::uint32_t count) {
        const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({});
        Aabb box;
        for (std::uint32_t i = first; i < first + count; ++i) {
            const SceneTriangle& t = tris_[order_[i]];
            box.expand(t.a);
            box.expand(t.b);
            box.expand(t.c);
        }
        if (count <= 4) {
            nodes_[index] = {box, first, 0, count};
            return index;
        }
        const Vec3 ext = box.extent();
        const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : ext.y >= ext.z ? 1 : 2;
        auto centroid = [&](std::uint32_t ti) {
            const SceneTriangle& t = tris_[ti];
            return (t.a[axis] + t.b[axis] + t.c[axis]) / 3.0;
        };
        const std::uint32_t mid = first + count / 2;
        std::nth_element(order_.begin() + first, order_.begin() + mid,
                         order_.begin() + first + count,
                         [&](std::uint32_t l, std::uint32_t r) { return centroid(l) < centroid(r); });
        const std::uint32_t left = build(first, count / 2);
        const std::uint32_t right = build(mid, count - count / 2);
        nodes_[index] = {box, left, right, 0};
        return index;
    }

    std::vector<SceneTriangle> tris_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// mesh-surface sampling
// ---------------------------------------------------------------------------

// Area-weighted uniform sampling over every triangle of every component.
// Each component draws from its own (seed, instance_id) stream, so sampling
// a subset of components reproduces exactly the points it would have
// contributed to the full bridge.
inline LabeledPointCloud sample_mesh_surface(const std::vector<ComponentMesh>& meshes,
                                             double density, std::uint64_t seed) {
    if (meshes.empty()) throw argument_error("sample_mesh_surface: empty mesh list");
    if (!(density > 0.0)) throw argument_error("sample_mesh_surface: density must be positive");

    LabeledPointCloud cloud;
    for (const ComponentMesh& mesh : meshes) {
        std::vector<double> cumulative;
        cumulative.reserve(mesh.triangles.size());
        double area = 0.0;
        for (const auto& t : mesh.triangles) {
            const Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
            const Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
            area += 0.5 * e1.cross(e2).norm();
            cumulative.push_back(area);
        }
        const auto count = static_cast<std::size_t>(std::llround(area * density));
        Rng rng(derive_seed(seed, mesh.instance_id, "msp-component"));
        for (std::size_t i = 0; i < count; ++i) {
            const double pick = rng.uniform() * area;
            const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
            const std::size_t ti = std::min<std::size_t>(it - cumulative.begin(),
                                                         mesh.triangles.size() - 1);
            const auto& t = mesh.triangles[ti];
            const double r1 = std::sqrt(rng.uniform());
            const double r2 = rng.uniform();
            const Vec3 p = mesh.vertices[t[0]] * (1.0 - r1) +
                           mesh.vertices[t[1]] * (r1 * (1.0 - r2)) +
                           mesh.vertices[t[2]] * (r1 * r2);
            cloud.points.push_back({p, Rgb{}, static_cast<std::uint8_t>(mesh.semantic),
                                    mesh.instance_id});
        }
    }
    return cloud;
}

// ---------------------------------------------------------------------------
// sensor placement
// ---------------------------------------------------------------------------

struct RslpParams {
    double operator_height = 1.8;  // scanner above the deck surface
    double ground_height = 1.8;    // tripod height at ground level
    double lateral_offset = 3.0;   // stand-off from the bridge footprint
};

// 12 stations: 6 on the deck centerline above the slab, 6 at ground level
// offset laterally from the footprint on alternating sides.
inline std::vector<SensorPose> place_sensors_rslp(const Aabb& bbox, double deck_top,
                                                  const RslpParams& params = {}) {
    if (!bbox.valid()) throw argument_error("place_sensors_rslp: invalid bbox");
    std::vector<SensorPose> poses;
    poses.reserve(12);
    const double yc = (bbox.min.y + bbox.max.y) / 2;
    for (int i = 0; i < 6; ++i) {
        const double fx = (i + 0.5) / 6.0;
        const double x = bbox.min.x + fx * (bbox.max.x - bbox.min.x);
        poses.push_back({{x, yc, deck_top + params.operator_height}, Mat3::identity()});
    }
    for (int i = 0; i < 6; ++i) {
        const double fx = (i + 0.5) / 6.0;
        const double x = bbox.min.x + fx * (bbox.max.x - bbox.min.x);
        const double y = i % 2 == 0 ? bbox.max.y + params.lateral_offset
                                    : bbox.min.y - params.lateral_offset;
        poses.push_back({{x, y, params.ground_height}, Mat3::identity()});
    }
    return poses;
}

struct PslpParams {
    int rows = 4;        // across the deck (y); accepted range [4,6]
    int cols = 8;        // along the axis (x); accepted range [8,12]
    double margin = 2.0; // grid overhang beyond the footprint
    std::array<double, 2> above_offsets{2.0, 6.0};    // above bbox z-max
    std::array<double, 2> below_fractions{0.25, 0.5}; // of bbox height, above ground
};

// Dense 4-level grid: two levels above the structure, two below deck level.
inline std::vector<SensorPose> place_sensors_pslp(const Aabb& bbox,
                                                  const PslpParams& params = {}) {
    if (!bbox.valid()) throw argument_error("place_sensors_pslp: invalid bbox");
    if (params.rows < 4 || params.rows > 6)
        throw config_error("place_sensors_pslp: rows must be in [4,6]");
    if (params.cols < 8 || params.cols > 12)
        throw config_error("place_sensors_pslp: cols must be in [8,12]");

    const double height = bbox.max.z - bbox.min.z;
    const std::array<double, 4> levels{
        bbox.min.z + params.below_fractions[0] * height,
        bbox.min.z + params.below_fractions[1] * height,
        bbox.max.z + params.above_offsets[0],
        bbox.max.z + params.above_offsets[1],
    };

    std::vector<SensorPose> poses;
    poses.reserve(4 * params.rows * params.cols);
    const double x0 = bbox.min.x - params.margin, x1 = bbox.max.x + params.margin;
    const double y0 = bbox.min.y - params.margin, y1 = bbox.max.y + params.margin;
    for (double z : levels)
        for (int r = 0; r < params.rows; ++r)
            for (int c = 0; c < params.cols; ++c) {
                const double x = x0 + (x1 - x0) * c / (params.cols - 1);
                const double y = y0 + (y1 - y0) * r / (params.rows - 1);
                poses.push_back({{x, y, z}, Mat3::identity()});
            }
    return poses;
}

// ---------------------------------------------------------------------------
// sensor clearance
// ---------------------------------------------------------------------------

inline double min_distance_to_meshes(const Vec3& p, const std::vector<ComponentMesh>& meshes) {
    double best = std::numeric_limits<double>::infinity();
    for (const ComponentMesh& m : meshes)
        for (const auto& t : m.triangles) {
            const Vec3 q = closest_point_on_triangle(p, m.vertices[t[0]], m.vertices[t[1]],
                                                     m.vertices[t[2]]);
            best = std::min(best, (p - q).norm());
        }
    return best;
}

// Parity test against one closed component; direction chosen off-axis to
// dodge edge-grazing rays.
inline bool point_inside_mesh(const Vec3& p, const ComponentMesh& mesh) {
    const Vec3 dir = Vec3{0.0317, 0.0721, 0.9968}.normalized();
    int hits = 0;
    for (const auto& t : mesh.triangles) {
        const auto hit = ray_triangle_intersect(p, dir, mesh.vertices[t[0]],
                                                mesh.vertices[t[1]], mesh.vertices[t[2]]);
        if (hit && *hit > kRayEpsilon) ++hits;
    }
    return hits % 2 == 1;
}

// Nudge poses laterally until each sits at least min_clearance away from
// every triangle and outside every closed component. Grid placements are
// bbox-driven and occasionally land on (or inside) geometry; the scan
// contract assumes off-surface sensors.
inline std::vector<SensorPose> ensure_sensor_clearance(std::vector<SensorPose> poses,
                                                       const std::vector<ComponentMesh>& meshes,
                                                       double min_clearance = 0.01) {
    const double step = 0.25;
    for (SensorPose& pose : poses) {
        for (int attempt = 0; attempt < 400; ++attempt) {
            bool inside = false;
            for (const ComponentMesh& m : meshes) {
                if (m.bbox().contains(pose.position) && point_inside_mesh(pose.position, m)) {
                    inside = true;
                    break;
                }
            }
            if (!inside && min_distance_to_meshes(pose.position, meshes) >= min_clearance)
                break;
            pose.position.y += step;
        }
    }
    return poses;
}

// ---------------------------------------------------------------------------
// LiDAR simulation
// ---------------------------------------------------------------------------

// Angular step counts for a field of view swept at a fixed resolution.
// Azimuth covers [-fov/2, fov/2) half-open (360 deg would duplicate the seam),
// elevation covers [-fov/2, +fov/2] inclusive of both poles.
inline int azimuth_step_count(const LidarConfig& c) {
    return std::max(1, static_cast<int>(std::floor(c.horizontal_fov / c.horizontal_resolution + 1e-9)));
}
inline int elevation_step_count(const LidarConfig& c) {
    return static_cast<int>(std::floor(c.vertical_fov / c.vertical_resolution + 1e-9)) + 1;
}

// One scan against a prebuilt BVH. Output order is (elevation, azimuth)
// row-major; rays without a hit in range contribute nothing.
inline LabeledPointCloud scan_scene(const TriangleBvh& bvh,
                                    const std::vector<ComponentMesh>& meshes,
                                    const SensorPose& pose, const LidarConfig& config) {
    validate(config);
    if (!pose.orientation.is_rotation())
        throw argument_error("scan_scene: pose orientation is not a proper rotation");

    const int n_elev = elevation_step_count(config);
    const int n_azim = azimuth_step_count(config);
    LabeledPointCloud cloud;
    for (int ei = 0; ei < n_elev; ++ei) {
        const double elev = deg_to_rad(-config.vertical_fov / 2 + ei * config.vertical_resolution);
        const double ce = std::cos(elev), se = std::sin(elev);
        for (int ai = 0; ai < n_azim; ++ai) {
            const double azim =
                deg_to_rad(-config.horizontal_fov / 2 + ai * config.horizontal_resolution);
            const Vec3 dir = pose.orientation *
                             Vec3{ce * std::cos(azim), ce * std::sin(azim), se};
            const auto hit = bvh.first_hit(pose.position, dir, config.min_range, config.max_range);
            if (!hit) continue;
            const ComponentMesh& m = meshes[hit->mesh_index];
            cloud.points.push_back({pose.position + dir * hit->t, Rgb{},
                                    static_cast<std::uint8_t>(m.semantic), m.instance_id});
        }
    }
    return cloud;
}

inline LabeledPointCloud simulate_lidar_scan(const std::vector<ComponentMesh>& meshes,
                                             const SensorPose& pose,
                                             const LidarConfig& config) {
    if (meshes.empty()) throw argument_error("simulate_lidar_scan: empty mesh list");
    const TriangleBvh bvh(meshes);
    return scan_scene(bvh, meshes, pose, config);
}

// Concatenation in input order; total count is the sum of the parts.
inline LabeledPointCloud merge_scans(const std::vector<LabeledPointCloud>& clouds) {
    LabeledPointCloud merged;
    std::size_t total = 0;
    for (const auto& c : clouds) total += c.size();
    merged.points.reserve(total);
    for (const auto& c : clouds)
        merged.points.insert(merged.points.end(), c.points.begin(), c.points.end());
    return merged;
}

}  // namespace bc
