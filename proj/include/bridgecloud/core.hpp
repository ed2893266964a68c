// Core vocabulary shared by every bridgecloud module: small vector/matrix
// math, labeled point clouds, axis-aligned boxes, error types, and the
// seeded random machinery that keeps every pipeline stage reproducible.
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bc {

inline constexpr std::string_view kToolName = "bridgecloud";
inline constexpr std::string_view kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

// Bad value passed to a library function.
struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid configuration (out-of-range knob, inconsistent ranges, ...).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem-level failure, message carries the offending path.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number when known.
struct parse_error : std::runtime_error {
    parse_error(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          line_number(line) {}
    std::size_t line_number = 0;
};

// ---------------------------------------------------------------------------
// vectors and rotations
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm_squared() const { return dot(*this); }
    double norm() const { return std::sqrt(norm_squared()); }
    Vec3 normalized() const { return *this / norm(); }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
    double operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Row-major 3x3 matrix; only what rotations and frame changes need.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }
    static Mat3 rotation_x(double rad) {
        const double c = std::cos(rad), s = std::sin(rad);
        return {{1, 0, 0, 0, c, -s, 0, s, c}};
    }
    static Mat3 rotation_y(double rad) {
        const double c = std::cos(rad), s = std::sin(rad);
        return {{c, 0, s, 0, 1, 0, -s, 0, c}};
    }
    static Mat3 rotation_z(double rad) {
        const double c = std::cos(rad), s = std::sin(rad);
        return {{c, -s, 0, s, c, 0, 0, 0, 1}};
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
                r.m[i * 3 + j] = s;
            }
        return r;
    }
    Mat3 transposed() const {
        return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
    }
    double determinant() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) -
               m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
    // Proper rotation: orthonormal with determinant +1.
    bool is_rotation(double tol = 1e-9) const {
        const Mat3 rtr = transposed() * *this;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double want = i == j ? 1.0 : 0.0;
                if (std::abs(rtr.m[i * 3 + j] - want) > tol) return false;
            }
        return std::abs(determinant() - 1.0) <= tol;
    }
};

inline double deg_to_rad(double deg) { return deg * (std::acos(-1.0) / 180.0); }

// ---------------------------------------------------------------------------
// labeled points
// ---------------------------------------------------------------------------

struct Rgb {
    std::uint8_t r = 255, g = 255, b = 255;
    bool operator==(const Rgb&) const = default;
};

// The five structural component classes; numbering is frozen (serialized
// into the .txt format and the dataset manifest).
enum class SemanticClass : std::uint8_t {
    slab = 0,
    barrier = 1,
    girder = 2,
    pier_cap = 3,
    pier = 4,
};

inline constexpr int kSemanticClassCount = 5;

inline std::string_view semantic_class_name(SemanticClass c) {
    switch (c) {
        case SemanticClass::slab: return "slab";
        case SemanticClass::barrier: return "barrier";
        case SemanticClass::girder: return "girder";
        case SemanticClass::pier_cap: return "pier_cap";
        case SemanticClass::pier: return "pier";
    }
    return "unknown";
}

struct Point {
    Vec3 position;
    Rgb color;
    std::uint8_t semantic = 0;
    std::uint32_t instance = 0;
    bool operator==(const Point&) const = default;
};

// Ordered point set; duplicates permitted, order is part of the contract.
struct LabeledPointCloud {
    std::vector<Point> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

// ---------------------------------------------------------------------------
// axis-aligned bounding box
// ---------------------------------------------------------------------------

struct Aabb {
    Vec3 min{std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
    Vec3 max{-std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};

    bool valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return (min + max) * 0.5; }
    double diagonal() const { return extent().norm(); }

    void expand(const Vec3& p) {
        min.x = std::min(min.x, p.x); min.y = std::min(min.y, p.y); min.z = std::min(min.z, p.z);
        max.x = std::max(max.x, p.x); max.y = std::max(max.y, p.y); max.z = std::max(max.z, p.z);
    }
    void merge(const Aabb& o) { expand(o.min); expand(o.max); }
    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
               p.z >= min.z && p.z <= max.z;
    }
};

inline Aabb cloud_bbox(const LabeledPointCloud& cloud) {
    if (cloud.empty()) throw argument_error("cloud_bbox: empty cloud");
    Aabb box;
    for (const Point& p : cloud.points) box.expand(p.position);
    return box;
}

// ---------------------------------------------------------------------------
// seeded randomness
//
// All randomness flows through two primitives so that results never depend
// on platform distributions or on how work is partitioned across threads:
//  * Rng        -- a sequential stream (std::mt19937_64 with hand-rolled
//                  uniform conversions; the engine itself is specified by
//                  the standard, so sequences are portable),
//  * unit_hash  -- a stateless per-index draw for decisions that must be
//                  independent of iteration order.
// ---------------------------------------------------------------------------

inline std::uint64_t split_mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Independent stream for (master seed, item index, stage name); lets any
// subset of a dataset be regenerated without touching the other items.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::string_view stage) {
    return split_mix64(master ^ split_mix64(index + 0x9e3779b97f4a7c15ull) ^
                       fnv1a64(stage));
}

// Uniform double in [0,1) keyed by (seed, index); order-independent.
inline double unit_hash(std::uint64_t seed, std::uint64_t index) {
    return static_cast<double>(split_mix64(seed ^ split_mix64(index)) >> 11) *
           0x1.0p-53;
}

namespace detail {

// Locale-independent fixed formatting (six decimals) via std::to_chars;
// shared by every writer so serialized files are canonical everywhere.
inline void append_fixed6(std::string& out, double value) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 6);
    out.append(buf, res.ptr);
}

inline void append_uint(std::string& out, std::uint64_t value) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, res.ptr);
}

}  // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0,n), unbiased
    std::uint64_t uniform_u64(std::uint64_t n) {
        if (n == 0) throw argument_error("Rng::uniform_u64: n must be positive");
        std::uint64_t x, r;
        do {
            x = next_u64();
            r = x % n;
        } while (x - r > std::uint64_t(0) - n);
        return r;
    }

    // [lo,hi] inclusive
    int uniform_int(int lo, int hi) {
        if (lo > hi) throw argument_error("Rng::uniform_int: lo > hi");
        return lo + static_cast<int>(uniform_u64(std::uint64_t(hi) - lo + 1));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace bc
