// Procedural reinforced-concrete bridge geometry. A seeded BridgeSpec is
// drawn from parameter ranges, then expanded into labeled component meshes:
// one continuous slab, two barriers, per-span girders, pier caps, and piers.
//
// Conventions: bridge axis along +x starting at x = 0, deck centered on
// y = 0, ground plane at z = 0. Every component mesh is a closed 2-manifold
// (each undirected edge is shared by exactly two triangles), so point-in-
// solid parity tests and interior/exterior reasoning are well defined.
#pragma once

#include "core.hpp"

#include <fstream>
#include <map>
#include <utility>

namespace bc {

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

enum class GirderSection { i_girder, rectangular };
enum class PierSection { circular, rectangular };

// Seeded parametric description of one bridge. All lengths in meters.
struct BridgeSpec {
    std::uint64_t seed = 0;
    int span_count = 1;
    std::vector<double> span_lengths;
    double deck_width = 10.0;
    int girders_per_span = 5;
    GirderSection girder_section = GirderSection::i_girder;
    int pier_count_per_bent = 2;
    PierSection pier_section = PierSection::circular;

    // component dimensions
    double slab_thickness = 0.25;
    double barrier_width = 0.4;
    double barrier_height = 1.0;
    double girder_depth = 1.6;
    double girder_width = 0.6;
    double pier_cap_width = 1.5;   // along the bridge axis
    double pier_cap_height = 1.2;
    double pier_height = 7.0;      // clear height, ground to pier top
    double pier_diameter = 1.2;
};

// Closed interval; draws are uniform.
struct ValueRange {
    double lo = 0.0, hi = 0.0;
};

struct IntRange {
    int lo = 0, hi = 0;
};

// Parameter ranges for spec generation; defaults give desk-scale variety
// while staying inside the documented invariant bounds.
struct ParamRanges {
    IntRange span_count{1, 4};
    ValueRange span_length{15.0, 40.0};
    ValueRange deck_width{8.0, 15.0};
    IntRange girders_per_span{4, 7};
    IntRange pier_count_per_bent{1, 4};
    ValueRange slab_thickness{0.2, 0.4};
    ValueRange barrier_width{0.3, 0.5};
    ValueRange barrier_height{0.8, 1.2};
    ValueRange girder_depth{1.0, 2.2};
    ValueRange girder_width{0.4, 0.7};
    ValueRange pier_cap_width{1.2, 2.0};
    ValueRange pier_cap_height{1.0, 1.5};
    ValueRange pier_height{5.0, 10.0};
    ValueRange pier_diameter{0.8, 1.8};
};

namespace detail {
inline void check_range(const ValueRange& r, std::string_view name) {
    if (!(r.lo <= r.hi) || !(r.lo > 0.0))
        throw config_error(std::string("invalid range for ") + std::string(name));
}
inline void check_range(const IntRange& r, std::string_view name) {
    if (r.lo > r.hi || r.lo < 1)
        throw config_error(std::string("invalid range for ") + std::string(name));
}
}  // namespace detail

inline void validate_ranges(const ParamRanges& r) {
    detail::check_range(r.span_count, "span_count");
    detail::check_range(r.span_length, "span_length");
    detail::check_range(r.deck_width, "deck_width");
    detail::check_range(r.girders_per_span, "girders_per_span");
    detail::check_range(r.pier_count_per_bent, "pier_count_per_bent");
    detail::check_range(r.slab_thickness, "slab_thickness");
    detail::check_range(r.barrier_width, "barrier_width");
    detail::check_range(r.barrier_height, "barrier_height");
    detail::check_range(r.girder_depth, "girder_depth");
    detail::check_range(r.girder_width, "girder_width");
    detail::check_range(r.pier_cap_width, "pier_cap_width");
    detail::check_range(r.pier_cap_height, "pier_cap_height");
    detail::check_range(r.pier_height, "pier_height");
    detail::check_range(r.pier_diameter, "pier_diameter");
}

// Triangle mesh carrying one semantic class and one instance id.
struct ComponentMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    SemanticClass semantic = SemanticClass::slab;
    std::uint32_t instance_id = 0;

    Aabb bbox() const {
        Aabb box;
        for (const Vec3& v : vertices) box.expand(v);
        return box;
    }
    double surface_area() const {
        double a = 0.0;
        for (const auto& t : triangles) {
            const Vec3 e1 = vertices[t[1]] - vertices[t[0]];
            const Vec3 e2 = vertices[t[2]] - vertices[t[0]];
            a += 0.5 * e1.cross(e2).norm();
        }
        return a;
    }
};

// ---------------------------------------------------------------------------
// spec generation
// ---------------------------------------------------------------------------

inline BridgeSpec generate_bridge_spec(std::uint64_t seed,
                                       const ParamRanges& ranges = {}) {
    validate_ranges(ranges);
    Rng rng(split_mix64(seed));

    BridgeSpec s;
    s.seed = seed;
    s.span_count = rng.uniform_int(ranges.span_count.lo, ranges.span_count.hi);
    s.span_lengths.reserve(s.span_count);
    for (int i = 0; i < s.span_count; ++i)
        s.span_lengths.push_back(rng.uniform(ranges.span_length.lo, ranges.span_length.hi));
    s.deck_width = rng.uniform(ranges.deck_width.lo, ranges.deck_width.hi);
    s.girders_per_span = rng.uniform_int(ranges.girders_per_span.lo, ranges.girders_per_span.hi);
    s.girder_section = rng.uniform_int(0, 1) == 0 ? GirderSection::i_girder
                                                  : GirderSection::rectangular;
    s.pier_count_per_bent =
        rng.uniform_int(ranges.pier_count_per_bent.lo, ranges.pier_count_per_bent.hi);
    s.pier_section = rng.uniform_int(0, 1) == 0 ? PierSection::circular
                                                : PierSection::rectangular;
    s.slab_thickness = rng.uniform(ranges.slab_thickness.lo, ranges.slab_thickness.hi);
    s.barrier_width = rng.uniform(ranges.barrier_width.lo, ranges.barrier_width.hi);
    s.barrier_height = rng.uniform(ranges.barrier_height.lo, ranges.barrier_height.hi);
    s.girder_depth = rng.uniform(ranges.girder_depth.lo, ranges.girder_depth.hi);
    s.girder_width = rng.uniform(ranges.girder_width.lo, ranges.girder_width.hi);
    s.pier_cap_width = rng.uniform(ranges.pier_cap_width.lo, ranges.pier_cap_width.hi);
    s.pier_cap_height = rng.uniform(ranges.pier_cap_height.lo, ranges.pier_cap_height.hi);
    s.pier_height = rng.uniform(ranges.pier_height.lo, ranges.pier_height.hi);
    s.pier_diameter = rng.uniform(ranges.pier_diameter.lo, ranges.pier_diameter.hi);
    return s;
}

// ---------------------------------------------------------------------------
// mesh building blocks
// ---------------------------------------------------------------------------

namespace detail {

// 1 mm air gap between bearing surfaces: components never interpenetrate and
// no two faces are coplanar, which keeps ray casts unambiguous.
inline constexpr double kBearingGap = 1e-3;

// Axis-aligned box as 12 triangles with outward orientation.
inline void append_box(ComponentMesh& mesh, const Vec3& lo, const Vec3& hi) {
    const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.insert(mesh.vertices.end(),
                         {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z},
                          {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
                          {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z},
                          {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}});
    static constexpr std::array<std::array<std::uint32_t, 3>, 12> kFaces{{
        {0, 2, 1}, {0, 3, 2},   // bottom (-z)
        {4, 5, 6}, {4, 6, 7},   // top (+z)
        {0, 1, 5}, {0, 5, 4},   // -y
        {3, 7, 6}, {3, 6, 2},   // +y
        {0, 4, 7}, {0, 7, 3},   // -x
        {1, 2, 6}, {1, 6, 5},   // +x
    }};
    for (const auto& f : kFaces)
        mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
}

struct Vec2 {
    double u = 0.0, v = 0.0;
};

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
}

// Ear-clipping triangulation of a simple polygon (indices into poly).
// Handles the non-convex girder sections; O(n^2) is fine at catalog sizes.
inline std::vector<std::array<int, 3>> triangulate_polygon(std::vector<Vec2> poly) {
    const int n = static_cast<int>(poly.size());
    if (n < 3) throw argument_error("triangulate_polygon: need at least 3 vertices");

    double area2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        area2 += a.u * b.v - b.u * a.v;
    }
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    if (area2 < 0.0) std::reverse(idx.begin(), idx.end());  // force CCW

    std::vector<std::array<int, 3>> tris;
    // closed containment: a vertex exactly on the candidate ear's boundary
    // blocks it, otherwise clipping leaves collinear edges behind (the
    // I-section has several vertices sharing grid lines)
    auto blocks_ear = [&](const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
        const double d1 = cross2(a, b, p);
        const double d2 = cross2(b, c, p);
        const double d3 = cross2(c, a, p);
        return d1 >= -1e-12 && d2 >= -1e-12 && d3 >= -1e-12;
    };
    int guard = 0;
    while (idx.size() > 3) {
        bool clipped = false;
        const int m = static_cast<int>(idx.size());
        for (int i = 0; i < m; ++i) {
            const int ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
            const Vec2 &a = poly[ia], &b = poly[ib], &c = poly[ic];
            if (cross2(a, b, c) <= 1e-12) continue;  // reflex or degenerate
            bool blocked = false;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic) continue;
                if (blocks_ear(poly[j], a, b, c)) { blocked = true; break; }
            }
            if (blocked) continue;
            tris.push_back({ia, ib, ic});
            idx.erase(idx.begin() + i);
            clipped = true;
            break;
        }
        if (!clipped || ++guard > 4 * n)
            throw argument_error("triangulate_polygon: polygon is not simple");
    }
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

// Extrude a simple polygon along a principal axis into a closed prism.
// The 2D (u,v) plane maps to the two world axes other than `axis`, in
// cyclic order (x: u->y v->z, y: u->z v->x, z: u->x v->y).
inline void append_prism(ComponentMesh& mesh, const std::vector<Vec2>& polygon,
                         int axis, double lo, double hi, const Vec2& offset = {}) {
    if (!(lo < hi)) throw argument_error("append_prism: lo must be < hi");
    auto to_world = [&](const Vec2& p, double a) {
        const double u = p.u + offset.u, v = p.v + offset.v;
        switch (axis) {
            case 0: return Vec3{a, u, v};
            case 1: return Vec3{v, a, u};
            default: return Vec3{u, v, a};
        }
    };

    // normalize to CCW so the cap orientation below is consistent
    std::vector<Vec2> poly = polygon;
    double area2 = 0.0;
    const int n = static_cast<int>(poly.size());
    for (int i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        area2 += a.u * b.v - b.u * a.v;
    }
    if (area2 < 0.0) std::reverse(poly.begin(), poly.end());

    const auto cap = triangulate_polygon(poly);
    const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (const Vec2& p : poly) mesh.vertices.push_back(to_world(p, lo));
    for (const Vec2& p : poly) mesh.vertices.push_back(to_world(p, hi));

    const std::uint32_t top = base + static_cast<std::uint32_t>(n);
    for (const auto& t : cap) {  // low cap faces -axis
        mesh.triangles.push_back({base + std::uint32_t(t[0]), base + std::uint32_t(t[2]),
                                  base + std::uint32_t(t[1])});
    }
    for (const auto& t : cap) {  // high cap faces +axis
        mesh.triangles.push_back({top + std::uint32_t(t[0]), top + std::uint32_t(t[1]),
                                  top + std::uint32_t(t[2])});
    }
    for (int i = 0; i < n; ++i) {
        const std::uint32_t a = base + std::uint32_t(i);
        const std::uint32_t b = base + std::uint32_t((i + 1) % n);
        mesh.triangles.push_back({a, b, top + std::uint32_t((i + 1) % n)});
        mesh.triangles.push_back({a, top + std::uint32_t((i + 1) % n), top + std::uint32_t(i)});
    }
}

// I-section outline in the (u = transverse, v = vertical) plane, CCW,
// v from 0 (soffit) to depth.
inline std::vector<Vec2> i_girder_profile(double width, double depth) {
    const double tf = 0.18 * depth;  // flange thickness
    const double tw = 0.30 * width;  // web thickness
    const double hw = 0.5 * width, hwb = 0.5 * tw;
    return {
        {-hw, 0.0},       {hw, 0.0},         {hw, tf},          {hwb, tf},
        {hwb, depth - tf}, {hw, depth - tf}, {hw, depth},       {-hw, depth},
        {-hw, depth - tf}, {-hwb, depth - tf}, {-hwb, tf},      {-hw, tf},
    };
}

inline std::vector<Vec2> regular_polygon(double radius, int segments) {
    std::vector<Vec2> poly;
    poly.reserve(segments);
    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * std::acos(-1.0) * i / segments;
        poly.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    return poly;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// bridge assembly
// ---------------------------------------------------------------------------

// Pier cap (bent) count per the layout rule: one cap per interior support;
// a single span gets two abutment-style caps so every class is present.
inline int pier_cap_count(const BridgeSpec& spec) {
    return spec.span_count == 1 ? 2 : spec.span_count - 1;
}

inline std::vector<ComponentMesh> build_bridge_meshes(const BridgeSpec& spec) {
    if (spec.span_count < 1 || static_cast<int>(spec.span_lengths.size()) != spec.span_count)
        throw argument_error("build_bridge_meshes: span_lengths must match span_count");
    if (spec.girders_per_span < 1 || spec.pier_count_per_bent < 1)
        throw argument_error("build_bridge_meshes: counts must be positive");

    using detail::kBearingGap;
    const double total_length = [&] {
        double L = 0.0;
        for (double s : spec.span_lengths) L += s;
        return L;
    }();
    const double w = spec.deck_width;

    // vertical stack, ground up
    const double pier_top = spec.pier_height;
    const double cap_lo = pier_top + kBearingGap;
    const double cap_hi = cap_lo + spec.pier_cap_height;
    const double girder_lo = cap_hi + kBearingGap;
    const double girder_hi = girder_lo + spec.girder_depth;
    const double slab_lo = girder_hi + kBearingGap;
    const double slab_hi = slab_lo + spec.slab_thickness;
    const double barrier_lo = slab_hi + kBearingGap;
    const double barrier_hi = barrier_lo + spec.barrier_height;

    std::vector<ComponentMesh> meshes;
    std::uint32_t next_instance = 0;
    auto start_mesh = [&](SemanticClass cls) {
        ComponentMesh m;
        m.semantic = cls;
        m.instance_id = next_instance++;
        return m;
    };

    // slab: one continuous deck
    {
        ComponentMesh slab = start_mesh(SemanticClass::slab);
        detail::append_box(slab, {0.0, -w / 2, slab_lo}, {total_length, w / 2, slab_hi});
        meshes.push_back(std::move(slab));
    }

    // barriers along both deck edges
    for (int side = 0; side < 2; ++side) {
        ComponentMesh barrier = start_mesh(SemanticClass::barrier);
        const double y_out = side == 0 ? w / 2 : -w / 2;
        const double y_in = side == 0 ? w / 2 - spec.barrier_width : -w / 2 + spec.barrier_width;
        detail::append_box(barrier, {0.0, std::min(y_out, y_in), barrier_lo},
                           {total_length, std::max(y_out, y_in), barrier_hi});
        meshes.push_back(std::move(barrier));
    }

    // span boundaries along x
    std::vector<double> span_edges{0.0};
    for (double s : spec.span_lengths) span_edges.push_back(span_edges.back() + s);

    // girders, span-major; 1 cm longitudinal joint clearance at each end
    const double joint = 0.01;
    for (int s = 0; s < spec.span_count; ++s) {
        const double x0 = span_edges[s] + joint;
        const double x1 = span_edges[s + 1] - joint;
        for (int g = 0; g < spec.girders_per_span; ++g) {
            const double yc = -w / 2 + (g + 1) * w / (spec.girders_per_span + 1);
            ComponentMesh girder = start_mesh(SemanticClass::girder);
            if (spec.girder_section == GirderSection::i_girder) {
                auto profile = detail::i_girder_profile(spec.girder_width, spec.girder_depth);
                detail::append_prism(girder, profile, 0, x0, x1, {yc, girder_lo});
            } else {
                detail::append_box(girder, {x0, yc - spec.girder_width / 2, girder_lo},
                                   {x1, yc + spec.girder_width / 2, girder_hi});
            }
            meshes.push_back(std::move(girder));
        }
    }

    // pier caps: interior supports, or both abutments for a single span
    std::vector<double> cap_centers;
    if (spec.span_count == 1) {
        cap_centers = {spec.pier_cap_width / 2, total_length - spec.pier_cap_width / 2};
    } else {
        for (int s = 1; s < spec.span_count; ++s) cap_centers.push_back(span_edges[s]);
    }
    const double cap_len = 0.92 * w;  // transverse, slightly inside the deck edge
    for (double cx : cap_centers) {
        ComponentMesh cap = start_mesh(SemanticClass::pier_cap);
        detail::append_box(cap, {cx - spec.pier_cap_width / 2, -cap_len / 2, cap_lo},
                           {cx + spec.pier_cap_width / 2, cap_len / 2, cap_hi});
        meshes.push_back(std::move(cap));
    }

    // piers under every cap, evenly spaced across the cap, down to ground
    for (double cx : cap_centers) {
        for (int p = 0; p < spec.pier_count_per_bent; ++p) {
            const double yc = -cap_len / 2 + (p + 1) * cap_len / (spec.pier_count_per_bent + 1);
            ComponentMesh pier = start_mesh(SemanticClass::pier);
            if (spec.pier_section == PierSection::circular) {
                auto circle = detail::regular_polygon(spec.pier_diameter / 2, 24);
                detail::append_prism(pier, circle, 2, 0.0, pier_top, {cx, yc});
            } else {
                const double h = spec.pier_diameter / 2;
                detail::append_box(pier, {cx - h, yc - h, 0.0}, {cx + h, yc + h, pier_top});
            }
            meshes.push_back(std::move(pier));
        }
    }

    return meshes;
}

// ---------------------------------------------------------------------------
// queries
// ---------------------------------------------------------------------------

inline Aabb bridge_bbox(const std::vector<ComponentMesh>& meshes) {
    if (meshes.empty()) throw argument_error("bridge_bbox: empty mesh list");
    Aabb box;
    for (const ComponentMesh& m : meshes) box.merge(m.bbox());
    return box;
}

// Top-of-deck elevation: highest slab vertex.
inline double deck_top_z(const std::vector<ComponentMesh>& meshes) {
    double top = -std::numeric_limits<double>::infinity();
    for (const ComponentMesh& m : meshes)
        if (m.semantic == SemanticClass::slab)
            for (const Vec3& v : m.vertices) top = std::max(top, v.z);
    if (!std::isfinite(top)) throw argument_error("deck_top_z: no slab mesh present");
    return top;
}

// Every undirected edge shared by exactly two triangles, and each directed
// edge used exactly once (consistent orientation).
inline bool is_closed_manifold(const ComponentMesh& mesh) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> undirected, directed;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const std::uint32_t a = t[e], b = t[(e + 1) % 3];
            if (a == b || a >= mesh.vertices.size() || b >= mesh.vertices.size()) return false;
            ++undirected[{std::min(a, b), std::max(a, b)}];
            ++directed[{a, b}];
        }
    }
    for (const auto& [edge, count] : undirected)
        if (count != 2) return false;
    for (const auto& [edge, count] : directed)
        if (count != 1) return false;
    return true;
}

// ---------------------------------------------------------------------------
// OBJ export (visual inspection)
// ---------------------------------------------------------------------------

inline void write_obj(const std::vector<ComponentMesh>& meshes, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("write_obj: cannot open " + path);
    std::string text;
    std::size_t vertex_base = 1;  // OBJ indices are 1-based
    for (const ComponentMesh& m : meshes) {
        text += "o ";
        text += semantic_class_name(m.semantic);
        text += "_";
        detail::append_uint(text, m.instance_id);
        text += "\n";
        for (const Vec3& v : m.vertices) {
            text += "v ";
            detail::append_fixed6(text, v.x);
            text += " ";
            detail::append_fixed6(text, v.y);
            text += " ";
            detail::append_fixed6(text, v.z);
            text += "\n";
        }
        for (const auto& t : m.triangles) {
            text += "f ";
            detail::append_uint(text, vertex_base + t[0]);
            text += " ";
            detail::append_uint(text, vertex_base + t[1]);
            text += " ";
            detail::append_uint(text, vertex_base + t[2]);
            text += "\n";
        }
        vertex_base += m.vertices.size();
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw io_error("write_obj: write failed for " + path);
}

}  // namespace bc
