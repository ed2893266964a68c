// Labeled point-cloud text format and the dataset manifest.
//
// Cloud format, one line per point:
//   X Y Z R G B sem inst
// Coordinates carry exactly six decimal places; the five trailing fields are
// integers. Parsing and formatting go through std::from_chars/std::to_chars,
// so behavior is locale-independent by construction.
#pragma once

#include "core.hpp"
#include "augment.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace bc {

// ---------------------------------------------------------------------------
// cloud text format
// ---------------------------------------------------------------------------

inline std::string format_cloud_txt(const LabeledPointCloud& cloud) {
    std::string out;
    out.reserve(cloud.size() * 48);
    for (const Point& p : cloud.points) {
        detail::append_fixed6(out, p.position.x);
        out.push_back(' ');
        detail::append_fixed6(out, p.position.y);
        out.push_back(' ');
        detail::append_fixed6(out, p.position.z);
        out.push_back(' ');
        detail::append_uint(out, p.color.r);
        out.push_back(' ');
        detail::append_uint(out, p.color.g);
        out.push_back(' ');
        detail::append_uint(out, p.color.b);
        out.push_back(' ');
        detail::append_uint(out, p.semantic);
        out.push_back(' ');
        detail::append_uint(out, p.instance);
        out.push_back('\n');
    }
    return out;
}

inline void write_cloud_txt(const LabeledPointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("write_cloud_txt: cannot open " + path);
    const std::string text = format_cloud_txt(cloud);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw io_error("write_cloud_txt: write failed for " + path);
}

inline LabeledPointCloud parse_cloud_txt(std::string_view text, const std::string& path) {
    LabeledPointCloud cloud;
    std::size_t line_number = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);  // CRLF

        // tokenize on blanks; empty lines are permitted and skipped
        std::array<std::string_view, 8> fields;
        int n_fields = 0;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            if (i >= line.size()) break;
            const std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
            if (n_fields == 8)
                throw parse_error(path, line_number, "expected 8 fields, found more");
            fields[n_fields++] = line.substr(start, i - start);
        }
        if (n_fields == 0) continue;
        if (n_fields != 8)
            throw parse_error(path, line_number,
                              "expected 8 fields, found " + std::to_string(n_fields));

        auto parse_double = [&](std::string_view s, const char* what) {
            double v = 0.0;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
                throw parse_error(path, line_number, std::string("bad ") + what + " value");
            return v;
        };
        auto parse_int = [&](std::string_view s, long lo, long hi, const char* what) {
            long v = 0;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < lo || v > hi)
                throw parse_error(path, line_number, std::string("bad ") + what + " value");
            return v;
        };

        Point p;
        p.position = {parse_double(fields[0], "X"), parse_double(fields[1], "Y"),
                      parse_double(fields[2], "Z")};
        p.color = {static_cast<std::uint8_t>(parse_int(fields[3], 0, 255, "R")),
                   static_cast<std::uint8_t>(parse_int(fields[4], 0, 255, "G")),
                   static_cast<std::uint8_t>(parse_int(fields[5], 0, 255, "B"))};
        p.semantic = static_cast<std::uint8_t>(
            parse_int(fields[6], 0, kSemanticClassCount - 1, "semantic label"));
        p.instance = static_cast<std::uint32_t>(
            parse_int(fields[7], 0, std::numeric_limits<std::int32_t>::max(), "instance label"));
        cloud.points.push_back(p);
    }
    return cloud;
}

inline LabeledPointCloud read_cloud_txt(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("read_cloud_txt: cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw io_error("read_cloud_txt: read failed for " + path);
    return parse_cloud_txt(buffer.str(), path);
}

// ---------------------------------------------------------------------------
// dataset manifest
// ---------------------------------------------------------------------------

enum class SamplingMode { msp, rslp, pslp };

inline std::string_view sampling_mode_name(SamplingMode m) {
    switch (m) {
        case SamplingMode::msp: return "MSP";
        case SamplingMode::rslp: return "RSLP";
        case SamplingMode::pslp: return "PSLP";
    }
    return "unknown";
}

inline SamplingMode sampling_mode_from_name(std::string_view name) {
    if (name == "MSP" || name == "msp") return SamplingMode::msp;
    if (name == "RSLP" || name == "rslp") return SamplingMode::rslp;
    if (name == "PSLP" || name == "pslp") return SamplingMode::pslp;
    throw argument_error("unknown sampling mode: " + std::string(name));
}

struct OcclusionSettings {
    bool enabled = false;
    int shape_count = 0;
    double sparsity = 0.6;
};

struct ManifestEntry {
    std::string bridge_id;
    int bridge_index = 0;
    std::uint64_t spec_seed = 0;
    SamplingMode mode = SamplingMode::pslp;
    OcclusionSettings occlusion;
    double voxel_size = 0.0;
    std::string color_scheme = "white";
    std::string split = "train";
    std::string path;
};

struct DatasetManifest {
    std::string tool = std::string(kToolName);
    std::string version = std::string(kToolVersion);
    std::uint64_t master_seed = 0;
    std::vector<ManifestEntry> entries;
};

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                         const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end())
        throw parse_error(path, 0, std::string("manifest missing required key \"") + key + "\"");
    return *it;
}

inline void warn_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                              const std::string& where, std::vector<std::string>* warnings) {
    for (const auto& [key, value] : j.items()) {
        if (known.count(key)) continue;
        const std::string msg = "ignoring unknown manifest key \"" + key + "\" in " + where;
        if (warnings)
            warnings->push_back(msg);
        else
            std::cerr << "warning: " << msg << "\n";
    }
}

}  // namespace detail

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
    nlohmann::json j;
    j["tool"] = m.tool;
    j["version"] = m.version;
    j["master_seed"] = m.master_seed;
    j["classes"] = {{"slab", 0}, {"barrier", 1}, {"girder", 2}, {"pier_cap", 3}, {"pier", 4}};
    j["entries"] = nlohmann::json::array();
    for (const ManifestEntry& e : m.entries) {
        nlohmann::json je;
        je["bridge_id"] = e.bridge_id;
        je["bridge_index"] = e.bridge_index;
        je["spec_seed"] = e.spec_seed;
        je["mode"] = sampling_mode_name(e.mode);
        je["occlusion"] = {{"enabled", e.occlusion.enabled},
                           {"shape_count", e.occlusion.shape_count},
                           {"sparsity", e.occlusion.sparsity}};
        je["voxel_size"] = e.voxel_size;
        je["color_scheme"] = e.color_scheme;
        je["split"] = e.split;
        je["path"] = e.path;
        j["entries"].push_back(std::move(je));
    }
    return j;
}

inline void write_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("write_manifest: cannot open " + path);
    out << manifest_to_json(m).dump(2) << "\n";
    if (!out) throw io_error("write_manifest: write failed for " + path);
}

inline DatasetManifest read_manifest(const std::string& path,
                                     std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("read_manifest: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path, 0, std::string("invalid JSON: ") + e.what());
    }

    detail::warn_unknown_keys(j, {"tool", "version", "master_seed", "classes", "entries"},
                              "manifest root", warnings);
    DatasetManifest m;
    m.tool = detail::require_key(j, "tool", path).get<std::string>();
    m.version = detail::require_key(j, "version", path).get<std::string>();
    m.master_seed = detail::require_key(j, "master_seed", path).get<std::uint64_t>();

    std::set<std::string> seen_paths;
    std::set<std::pair<std::string, std::string>> seen_id_mode;
    for (const auto& je : detail::require_key(j, "entries", path)) {
        detail::warn_unknown_keys(je,
                                  {"bridge_id", "bridge_index", "spec_seed", "mode", "occlusion",
                                   "voxel_size", "color_scheme", "split", "path"},
                                  "manifest entry", warnings);
        ManifestEntry e;
        e.bridge_id = detail::require_key(je, "bridge_id", path).get<std::string>();
        e.spec_seed = detail::require_key(je, "spec_seed", path).get<std::uint64_t>();
        e.mode = sampling_mode_from_name(
            detail::require_key(je, "mode", path).get<std::string>());
        e.path = detail::require_key(je, "path", path).get<std::string>();
        e.bridge_index = je.value("bridge_index", 0);
        e.voxel_size = je.value("voxel_size", 0.0);
        e.color_scheme = je.value("color_scheme", "white");
        e.split = je.value("split", "train");
        if (const auto it = je.find("occlusion"); it != je.end()) {
            detail::warn_unknown_keys(*it, {"enabled", "shape_count", "sparsity"},
                                      "occlusion settings", warnings);
            e.occlusion.enabled = it->value("enabled", false);
            e.occlusion.shape_count = it->value("shape_count", 0);
            e.occlusion.sparsity = it->value("sparsity", 0.6);
        }
        if (!seen_paths.insert(e.path).second)
            throw parse_error(path, 0, "duplicate entry path \"" + e.path + "\"");
        seen_id_mode.insert({e.bridge_id, std::string(sampling_mode_name(e.mode))});
        m.entries.push_back(std::move(e));
    }
    return m;
}

}  // namespace bc
