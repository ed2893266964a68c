// Shared test fixtures and independent oracles. Everything here is written
// against the problem statement, not against the library internals, so the
// checks stay meaningful.
#pragma once

#include "bridgecloud/bridgecloud.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

namespace testutil {

using namespace bc;

// Self-cleaning scratch directory.
struct TempDir {
    std::filesystem::path path;
    TempDir()
        : path(std::filesystem::temp_directory_path() /
               ("bridgecloud_test_" +
                std::to_string(split_mix64(static_cast<std::uint64_t>(
                    std::chrono::steady_clock::now().time_since_epoch().count()))))) {
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// ---------------------------------------------------------------------------
// fixture meshes
// ---------------------------------------------------------------------------

inline ComponentMesh make_unit_cube(const Vec3& lo = {0, 0, 0}, double edge = 1.0,
                                    SemanticClass cls = SemanticClass::slab,
                                    std::uint32_t instance = 0) {
    ComponentMesh m;
    m.semantic = cls;
    m.instance_id = instance;
    bc::detail::append_box(m, lo, lo + Vec3{edge, edge, edge});
    return m;
}

// Unit sphere tessellated from an icosahedron; vertices lie exactly on the
// sphere, so every surface point is within the chord sagitta of radius 1.
inline ComponentMesh make_icosphere(int subdivisions, double radius = 1.0,
                                    const Vec3& center = {0, 0, 0}) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
    for (Vec3& v : verts) v = v.normalized();
    std::vector<std::array<std::uint32_t, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            verts.push_back(((verts[a] + verts[b]) * 0.5).normalized());
            const auto idx = static_cast<std::uint32_t>(verts.size() - 1);
            midpoints.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<std::uint32_t, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const std::uint32_t ab = midpoint(f[0], f[1]);
            const std::uint32_t bcm = midpoint(f[1], f[2]);
            const std::uint32_t ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bcm, ab});
            next.push_back({f[2], ca, bcm});
            next.push_back({ab, bcm, ca});
        }
        faces = std::move(next);
    }
    ComponentMesh m;
    m.vertices = std::move(verts);
    for (Vec3& v : m.vertices) v = center + v * radius;
    m.triangles = std::move(faces);
    m.semantic = SemanticClass::girder;
    m.instance_id = 0;
    return m;
}

// Closed hollow box: outer shell plus a sealed interior cavity. The cavity
// walls are unreachable by any exterior ray but carry surface area.
struct HollowBox {
    ComponentMesh mesh;
    Aabb outer;
    Aabb cavity;
};

inline HollowBox make_hollow_box(const Vec3& lo, const Vec3& hi, double wall) {
    HollowBox box;
    box.outer = {lo, hi};
    box.cavity = {lo + Vec3{wall, wall, wall}, hi - Vec3{wall, wall, wall}};
    box.mesh.semantic = SemanticClass::girder;
    box.mesh.instance_id = 0;
    bc::detail::append_box(box.mesh, box.outer.min, box.outer.max);
    bc::detail::append_box(box.mesh, box.cavity.min, box.cavity.max);
    return box;
}

inline bool on_box_surface(const Vec3& p, const Aabb& box, double tol = 1e-9) {
    if (p.x < box.min.x - tol || p.x > box.max.x + tol || p.y < box.min.y - tol ||
        p.y > box.max.y + tol || p.z < box.min.z - tol || p.z > box.max.z + tol)
        return false;
    for (int axis = 0; axis < 3; ++axis)
        if (std::abs(p[axis] - box.min[axis]) <= tol || std::abs(p[axis] - box.max[axis]) <= tol)
            return true;
    return false;
}

// A bridge whose same-class instances are separated by far more than the
// default DBSCAN eps: single span, wide deck, few girders, one pier per bent.
inline BridgeSpec make_separated_spec() {
    ParamRanges ranges;
    ranges.span_count = {1, 1};
    ranges.span_length = {20.0, 20.0};
    ranges.deck_width = {15.0, 15.0};
    ranges.girders_per_span = {4, 4};
    ranges.pier_count_per_bent = {2, 2};
    ranges.girder_width = {0.5, 0.5};
    ranges.pier_diameter = {1.0, 1.0};
    return generate_bridge_spec(11, ranges);
}

// ---------------------------------------------------------------------------
// independent oracles
// ---------------------------------------------------------------------------

// Nearest-hit ray cast by testing every triangle (first-hit oracle).
inline std::optional<RayHit> brute_force_first_hit(const std::vector<ComponentMesh>& meshes,
                                                   const Vec3& origin, const Vec3& dir,
                                                   double t_min, double t_max) {
    std::optional<RayHit> best;
    for (std::uint32_t mi = 0; mi < meshes.size(); ++mi) {
        for (const auto& t : meshes[mi].triangles) {
            const auto hit = ray_triangle_intersect(origin, dir, meshes[mi].vertices[t[0]],
                                                    meshes[mi].vertices[t[1]],
                                                    meshes[mi].vertices[t[2]]);
            if (hit && *hit >= t_min && *hit <= t_max && (!best || *hit < best->t))
                best = RayHit{*hit, mi};
        }
    }
    return best;
}

// O(n^2) DBSCAN reference: full pairwise neighbor lists, BFS over core
// points, borders attached to their nearest core (ties to the lower index),
// then canonical renumbering by lowest contained index.
inline std::vector<int> brute_force_dbscan(const std::vector<Vec3>& pts, double eps,
                                           int min_pts) {
    const std::size_t n = pts.size();
    const double eps_sq = eps * eps;
    std::vector<std::vector<std::uint32_t>> neighbors(n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            if ((pts[i] - pts[j]).norm_squared() <= eps_sq) neighbors[i].push_back(j);

    std::vector<char> core(n, 0);
    for (std::uint32_t i = 0; i < n; ++i)
        core[i] = static_cast<int>(neighbors[i].size()) >= min_pts;

    std::vector<int> cluster(n, -1);
    int next_cluster = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!core[i] || cluster[i] != -1) continue;
        const int id = next_cluster++;
        std::queue<std::uint32_t> frontier;
        frontier.push(i);
        cluster[i] = id;
        while (!frontier.empty()) {
            const std::uint32_t cur = frontier.front();
            frontier.pop();
            for (std::uint32_t nb : neighbors[cur]) {
                if (!core[nb] || cluster[nb] != -1) continue;
                cluster[nb] = id;
                frontier.push(nb);
            }
        }
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        double best_d = std::numeric_limits<double>::infinity();
        std::int64_t best = -1;
        for (std::uint32_t nb : neighbors[i]) {
            if (!core[nb]) continue;
            const double d = (pts[i] - pts[nb]).norm_squared();
            if (d < best_d || (d == best_d && static_cast<std::int64_t>(nb) < best)) {
                best_d = d;
                best = nb;
            }
        }
        if (best >= 0) cluster[i] = cluster[static_cast<std::uint32_t>(best)];
    }
    return cluster;
}

// Renumber cluster labels so ids follow each cluster's lowest point index;
// noise stays -1. Makes label vectors comparable across implementations.
inline std::vector<int> canonical_cluster_labels(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        const auto it = remap.find(labels[i]);
        if (it == remap.end()) remap.emplace(labels[i], next++);
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0) out[i] = remap.at(labels[i]);
    return out;
}

// Exact minimum assignment cost by enumerating injective maps from the
// smaller side into the larger (factorial oracle, fine for n <= 6).
inline double brute_force_assignment_cost(const CostMatrix& cost) {
    const std::size_t small = std::min(cost.rows, cost.cols);
    const std::size_t large = std::max(cost.rows, cost.cols);
    if (small == 0) return 0.0;
    std::vector<int> perm(large);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t k = 0; k < small; ++k)
            total += cost.rows <= cost.cols ? cost.at(k, perm[k]) : cost.at(perm[k], k);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// ---------------------------------------------------------------------------
// misc
// ---------------------------------------------------------------------------

inline bool clouds_identical(const LabeledPointCloud& a, const LabeledPointCloud& b) {
    return a.points == b.points;
}

inline double max_pairwise_distance(const LabeledPointCloud& cloud) {
    double best = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        for (std::size_t j = i + 1; j < cloud.size(); ++j)
            best = std::max(best,
                            (cloud.points[i].position - cloud.points[j].position).norm());
    return best;
}

}  // namespace testutil
