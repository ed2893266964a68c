// Pre-processing and augmentation: sparsity-based occlusion inside random
// geometric shapes, voxel-grid downsampling, color schemes, the standard
// scale/rotate/flip stack, and block cropping.
//
// Per-point random decisions key off (seed, point index) so results do not
// depend on how points are partitioned across threads.
#pragma once

#include "core.hpp"

#include <map>
#include <unordered_map>

namespace bc {

// ---------------------------------------------------------------------------
// occlusion
// ---------------------------------------------------------------------------

// Fraction of points REMOVED inside each occlusion shape; 0.6 keeps 40%.
struct SparsityFactor {
    double value = 0.6;

    SparsityFactor() = default;
    explicit SparsityFactor(double v) : value(v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw argument_error("SparsityFactor: value must be in [0,1]");
    }
};

struct OcclusionShape {
    enum class Kind { cube, sphere, prism };

    Kind kind = Kind::cube;
    Vec3 center;
    double size = 1.0;        // cube edge / sphere diameter / prism base=height=length
    double z_rotation = 0.0;  // radians

    bool contains(const Vec3& p) const {
        const Vec3 d = p - center;
        const double c = std::cos(-z_rotation), s = std::sin(-z_rotation);
        const double lx = c * d.x - s * d.y;
        const double ly = s * d.x + c * d.y;
        const double lz = d.z;
        const double h = size / 2;
        switch (kind) {
            case Kind::sphere:
                return d.norm_squared() <= h * h;
            case Kind::cube:
                return std::abs(lx) <= h && std::abs(ly) <= h && std::abs(lz) <= h;
            case Kind::prism: {
                if (std::abs(lz) > h) return false;
                // triangle (-h,-h) (h,-h) (0,h), CCW half-plane tests
                auto edge = [&](double ax, double ay, double bx, double by) {
                    return (bx - ax) * (ly - ay) - (by - ay) * (lx - ax) >= 0.0;
                };
                return edge(-h, -h, h, -h) && edge(h, -h, 0.0, h) && edge(0.0, h, -h, -h);
            }
        }
        return false;
    }
};

// Random shapes: kind uniform over the three kinds, centers uniform in the
// box, characteristic size uniform in [5%, 20%] of the box diagonal.
inline std::vector<OcclusionShape> generate_occlusion_shapes(const Aabb& bbox, int count,
                                                             std::uint64_t seed) {
    if (count < 0) throw argument_error("generate_occlusion_shapes: count must be >= 0");
    if (!bbox.valid() || !(bbox.diagonal() > 0.0))
        throw config_error("generate_occlusion_shapes: degenerate bbox");

    const double diag = bbox.diagonal();
    Rng rng(split_mix64(seed));
    std::vector<OcclusionShape> shapes;
    shapes.reserve(count);
    for (int i = 0; i < count; ++i) {
        OcclusionShape s;
        s.kind = static_cast<OcclusionShape::Kind>(rng.uniform_int(0, 2));
        s.center = {rng.uniform(bbox.min.x, bbox.max.x), rng.uniform(bbox.min.y, bbox.max.y),
                    rng.uniform(bbox.min.z, bbox.max.z)};
        s.size = rng.uniform(0.05 * diag, 0.20 * diag);
        s.z_rotation = rng.uniform(0.0, 2.0 * std::acos(-1.0));
        shapes.push_back(s);
    }
    return shapes;
}

// Points inside at least one shape are independently removed with
// probability sparsity.value; everything else passes through untouched.
inline LabeledPointCloud apply_occlusion(const LabeledPointCloud& cloud,
                                         const std::vector<OcclusionShape>& shapes,
                                         SparsityFactor sparsity, std::uint64_t seed) {
    LabeledPointCloud out;
    out.points.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Point& p = cloud.points[i];
        bool occluded = false;
        for (const OcclusionShape& s : shapes)
            if (s.contains(p.position)) { occluded = true; break; }
        if (occluded && unit_hash(seed, i) < sparsity.value) continue;
        out.points.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// voxel downsampling
// ---------------------------------------------------------------------------

// One representative per occupied voxel: the input point nearest the voxel's
// point centroid, keeping its own color and labels (no label voting). Output
// preserves the representatives' input order, which makes the operation
// idempotent at a fixed size.
inline LabeledPointCloud voxel_downsample(const LabeledPointCloud& cloud, double voxel_size) {
    if (!(voxel_size > 0.0)) throw argument_error("voxel_downsample: voxel_size must be positive");
    if (cloud.empty()) return {};

    struct Key {
        std::int64_t x, y, z;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = split_mix64(static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ull);
            h ^= split_mix64(static_cast<std::uint64_t>(k.y) + 0xbf58476d1ce4e5b9ull);
            h = split_mix64(h ^ static_cast<std::uint64_t>(k.z));
            return static_cast<std::size_t>(h);
        }
    };
    auto key_of = [&](const Vec3& p) {
        return Key{static_cast<std::int64_t>(std::floor(p.x / voxel_size)),
                   static_cast<std::int64_t>(std::floor(p.y / voxel_size)),
                   static_cast<std::int64_t>(std::floor(p.z / voxel_size))};
    };

    std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> voxels;
    voxels.reserve(cloud.size());
    for (std::uint32_t i = 0; i < cloud.points.size(); ++i)
        voxels[key_of(cloud.points[i].position)].push_back(i);

    std::vector<std::uint32_t> representatives;
    representatives.reserve(voxels.size());
    for (const auto& [key, indices] : voxels) {
        Vec3 centroid;
        for (std::uint32_t i : indices) centroid += cloud.points[i].position;
        centroid = centroid / static_cast<double>(indices.size());
        std::uint32_t best = indices.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::uint32_t i : indices) {
            const double d = (cloud.points[i].position - centroid).norm_squared();
            if (d < best_d || (d == best_d && i < best)) {
                best_d = d;
                best = i;
            }
        }
        representatives.push_back(best);
    }
    std::sort(representatives.begin(), representatives.end());

    LabeledPointCloud out;
    out.points.reserve(representatives.size());
    for (std::uint32_t i : representatives) out.points.push_back(cloud.points[i]);
    return out;
}

// ---------------------------------------------------------------------------
// color schemes
// ---------------------------------------------------------------------------

enum class ColorScheme { white, random_rgb, height_gradient };

inline std::string_view color_scheme_name(ColorScheme s) {
    switch (s) {
        case ColorScheme::white: return "white";
        case ColorScheme::random_rgb: return "random";
        case ColorScheme::height_gradient: return "height";
    }
    return "unknown";
}

inline ColorScheme color_scheme_from_name(std::string_view name) {
    if (name == "white") return ColorScheme::white;
    if (name == "random") return ColorScheme::random_rgb;
    if (name == "height") return ColorScheme::height_gradient;
    throw argument_error("unknown color scheme: " + std::string(name));
}

inline constexpr Rgb kHeightAnchorLow{0, 0, 255};
inline constexpr Rgb kHeightAnchorHigh{255, 0, 0};

inline LabeledPointCloud colorize(const LabeledPointCloud& cloud, ColorScheme scheme,
                                  std::uint64_t seed, Rgb anchor_low = kHeightAnchorLow,
                                  Rgb anchor_high = kHeightAnchorHigh) {
    LabeledPointCloud out = cloud;
    switch (scheme) {
        case ColorScheme::white:
            for (Point& p : out.points) p.color = {255, 255, 255};
            break;
        case ColorScheme::random_rgb:
            for (std::size_t i = 0; i < out.points.size(); ++i) {
                const std::uint64_t h = split_mix64(seed ^ split_mix64(i));
                out.points[i].color = {static_cast<std::uint8_t>(h & 0xff),
                                       static_cast<std::uint8_t>((h >> 8) & 0xff),
                                       static_cast<std::uint8_t>((h >> 16) & 0xff)};
            }
            break;
        case ColorScheme::height_gradient: {
            if (cloud.empty())
                throw argument_error("colorize: height gradient needs a non-empty cloud");
            double z_min = std::numeric_limits<double>::infinity();
            double z_max = -std::numeric_limits<double>::infinity();
            for (const Point& p : cloud.points) {
                z_min = std::min(z_min, p.position.z);
                z_max = std::max(z_max, p.position.z);
            }
            auto lerp = [](std::uint8_t a, std::uint8_t b, double t) {
                return static_cast<std::uint8_t>(std::lround(a + t * (double(b) - double(a))));
            };
            for (Point& p : out.points) {
                const double t = z_max > z_min ? (p.position.z - z_min) / (z_max - z_min) : 0.0;
                p.color = {lerp(anchor_low.r, anchor_high.r, t), lerp(anchor_low.g, anchor_high.g, t),
                           lerp(anchor_low.b, anchor_high.b, t)};
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// standard augmentations
// ---------------------------------------------------------------------------

struct AugmentConfig {
    double scale_min = 0.9, scale_max = 1.1;  // +/-10%
    double z_rotation_max_deg = 360.0;        // rotation about z in [0, max)
    double xy_tilt_max_deg = 5.0;             // tilt about x and y in [-max, max]
    double flip_probability = 0.5;            // mirror across the xz-plane
    Vec3 block_size{10.0, 10.0, 10.0};
};

inline void validate(const AugmentConfig& c) {
    if (!(c.scale_min <= c.scale_max) || c.scale_min < 0.5 || c.scale_max > 1.5)
        throw config_error("AugmentConfig: scale range must sit inside [0.5, 1.5]");
    if (c.z_rotation_max_deg < 0.0 || c.xy_tilt_max_deg < 0.0)
        throw config_error("AugmentConfig: rotation ranges must be non-negative");
    if (!(c.flip_probability >= 0.0 && c.flip_probability <= 1.0))
        throw config_error("AugmentConfig: flip probability must be in [0,1]");
}

// The concrete parameters drawn for one augmentation pass.
struct AugmentDraw {
    double scale = 1.0;
    double tilt_x_deg = 0.0;
    double tilt_y_deg = 0.0;
    double rot_z_deg = 0.0;
    bool flip = false;
};

inline AugmentDraw draw_augmentation(const AugmentConfig& config, std::uint64_t seed) {
    validate(config);
    Rng rng(split_mix64(seed));
    AugmentDraw d;
    d.scale = rng.uniform(config.scale_min, config.scale_max);
    d.tilt_x_deg = rng.uniform(-config.xy_tilt_max_deg, config.xy_tilt_max_deg);
    d.tilt_y_deg = rng.uniform(-config.xy_tilt_max_deg, config.xy_tilt_max_deg);
    d.rot_z_deg = rng.uniform(0.0, config.z_rotation_max_deg);
    d.flip = rng.uniform() < config.flip_probability;
    return d;
}

// Scale about the centroid, tilt about x then y, rotate about z, then
// optionally mirror across the xz-plane. Labels and point count unchanged.
inline LabeledPointCloud apply_augmentation(const LabeledPointCloud& cloud,
                                            const AugmentDraw& draw) {
    if (cloud.empty()) return cloud;
    Vec3 centroid;
    for (const Point& p : cloud.points) centroid += p.position;
    centroid = centroid / static_cast<double>(cloud.size());

    const Mat3 rot = Mat3::rotation_z(deg_to_rad(draw.rot_z_deg)) *
                     Mat3::rotation_y(deg_to_rad(draw.tilt_y_deg)) *
                     Mat3::rotation_x(deg_to_rad(draw.tilt_x_deg));
    LabeledPointCloud out = cloud;
    for (Point& p : out.points) {
        Vec3 q = centroid + rot * ((p.position - centroid) * draw.scale);
        if (draw.flip) q.y = -q.y;
        p.position = q;
    }
    return out;
}

inline LabeledPointCloud apply_standard_augmentations(const LabeledPointCloud& cloud,
                                                      const AugmentConfig& config,
                                                      std::uint64_t seed) {
    return apply_augmentation(cloud, draw_augmentation(config, seed));
}

// ---------------------------------------------------------------------------
// block cropping
// ---------------------------------------------------------------------------

// Partition into an axis-aligned grid of equal blocks anchored at the cloud's
// bbox minimum. Every point lands in exactly one block (points on the far
// boundary fold into the last block); empty blocks are omitted. Blocks are
// ordered lexicographically by grid index, points keep their input order.
inline std::vector<LabeledPointCloud> crop_blocks(const LabeledPointCloud& cloud,
                                                  const Vec3& block_size) {
    if (!(block_size.x > 0.0 && block_size.y > 0.0 && block_size.z > 0.0))
        throw argument_error("crop_blocks: block_size must be positive componentwise");
    if (cloud.empty()) return {};

    const Aabb box = cloud_bbox(cloud);
    const Vec3 ext = box.extent();
    auto blocks_along = [](double extent, double size) {
        return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(extent / size - 1e-9)));
    };
    const std::int64_t nx = blocks_along(ext.x, block_size.x);
    const std::int64_t ny = blocks_along(ext.y, block_size.y);
    const std::int64_t nz = blocks_along(ext.z, block_size.z);
    auto index_along = [](double coord, double origin, double size, std::int64_t n) {
        const auto i = static_cast<std::int64_t>(std::floor((coord - origin) / size));
        return std::clamp<std::int64_t>(i, 0, n - 1);
    };

    std::map<std::array<std::int64_t, 3>, LabeledPointCloud> blocks;
    for (const Point& p : cloud.points) {
        const std::array<std::int64_t, 3> key{
            index_along(p.position.x, box.min.x, block_size.x, nx),
            index_along(p.position.y, box.min.y, block_size.y, ny),
            index_along(p.position.z, box.min.z, block_size.z, nz)};
        blocks[key].points.push_back(p);
    }

    std::vector<LabeledPointCloud> out;
    out.reserve(blocks.size());
    for (auto& [key, block] : blocks) out.push_back(std::move(block));
    return out;
}

}  // namespace bc
