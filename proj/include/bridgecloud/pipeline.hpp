// Dataset production: seeded spec -> meshes -> sampling mode(s) ->
// occlusion -> voxel downsampling -> colorization -> optional augmentation
// -> .txt files plus a JSON manifest.
//
// Every stage draws from a stream derived from (master seed, bridge index,
// stage name), so any subset of the dataset regenerates bit-identically and
// the output does not depend on thread count. Files are written atomically
// (temp + rename); the manifest is written last.
#pragma once

#include "core.hpp"
#include "geometry.hpp"
#include "sampling.hpp"
#include "augment.hpp"
#include "io.hpp"

#include <atomic>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

namespace bc {

struct PipelineConfig {
    int bridge_count = 1;
    std::uint64_t master_seed = 0;
    std::vector<SamplingMode> modes{SamplingMode::pslp};

    bool occlusion_enabled = false;
    int occlusion_count = 10;
    double occlusion_sparsity = 0.6;
    bool occlusion_double = false;  // also emit the clean variant per bridge

    double voxel_size = 0.02;  // 0 disables downsampling
    ColorScheme color = ColorScheme::white;

    bool augment_enabled = false;
    AugmentConfig augment;

    double train_fraction = 52.0 / 60.0;
    std::string out_dir;

    // sampling knobs
    double msp_density = 1000.0;  // points per square meter
    LidarConfig lidar;            // 0.4 deg default; tests use coarser presets
    RslpParams rslp;
    PslpParams pslp;

    ParamRanges ranges;
    bool export_obj = false;
    int threads = 0;  // 0 = hardware concurrency
};

inline void validate(const PipelineConfig& c) {
    if (c.bridge_count < 1) throw config_error("pipeline: bridge_count must be >= 1");
    if (c.modes.empty()) throw config_error("pipeline: need at least one sampling mode");
    std::set<SamplingMode> distinct(c.modes.begin(), c.modes.end());
    if (distinct.size() != c.modes.size())
        throw config_error("pipeline: duplicate sampling modes");
    if (!(c.train_fraction >= 0.0 && c.train_fraction <= 1.0))
        throw config_error("pipeline: split fractions must sum to 1 with both in [0,1]");
    if (c.occlusion_enabled && c.occlusion_count < 1)
        throw config_error("pipeline: occlusion enabled but shape count < 1");
    if (!(c.occlusion_sparsity >= 0.0 && c.occlusion_sparsity <= 1.0))
        throw config_error("pipeline: occlusion sparsity must be in [0,1]");
    if (c.voxel_size < 0.0) throw config_error("pipeline: voxel size must be >= 0");
    if (!(c.msp_density > 0.0)) throw config_error("pipeline: MSP density must be positive");
    if (c.out_dir.empty()) throw config_error("pipeline: output directory required");
    validate(c.lidar);
    if (c.augment_enabled) validate(c.augment);
}

namespace detail {

inline void write_file_atomic(const std::string& text, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw io_error("cannot open " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw io_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline LabeledPointCloud sample_bridge(const std::vector<ComponentMesh>& meshes,
                                       const TriangleBvh& bvh, SamplingMode mode,
                                       const PipelineConfig& config, std::uint64_t bridge_seed) {
    switch (mode) {
        case SamplingMode::msp:
            return sample_mesh_surface(meshes, config.msp_density,
                                       derive_seed(bridge_seed, 0, "msp"));
        case SamplingMode::rslp: {
            const Aabb box = bridge_bbox(meshes);
            auto poses = place_sensors_rslp(box, deck_top_z(meshes), config.rslp);
            poses = ensure_sensor_clearance(std::move(poses), meshes);
            std::vector<LabeledPointCloud> scans;
            scans.reserve(poses.size());
            for (const SensorPose& pose : poses)
                scans.push_back(scan_scene(bvh, meshes, pose, config.lidar));
            return merge_scans(scans);
        }
        case SamplingMode::pslp: {
            const Aabb box = bridge_bbox(meshes);
            auto poses = place_sensors_pslp(box, config.pslp);
            poses = ensure_sensor_clearance(std::move(poses), meshes);
            std::vector<LabeledPointCloud> scans;
            scans.reserve(poses.size());
            for (const SensorPose& pose : poses)
                scans.push_back(scan_scene(bvh, meshes, pose, config.lidar));
            return merge_scans(scans);
        }
    }
    throw argument_error("sample_bridge: unknown mode");
}

}  // namespace detail

inline DatasetManifest run_pipeline(const PipelineConfig& config) {
    validate(config);
    namespace fs = std::filesystem;
    const fs::path root(config.out_dir);
    std::error_code ec;
    fs::create_directories(root / "train", ec);
    fs::create_directories(root / "val", ec);
    if (!fs::is_directory(root / "train") || !fs::is_directory(root / "val"))
        throw io_error("run_pipeline: cannot create output directory " + root.string());

    const int train_count = static_cast<int>(
        std::llround(config.train_fraction * config.bridge_count));
    const bool any_lidar =
        std::any_of(config.modes.begin(), config.modes.end(),
                    [](SamplingMode m) { return m != SamplingMode::msp; });

    std::vector<std::vector<ManifestEntry>> per_bridge(config.bridge_count);
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::atomic<int> next_bridge{0};

    auto process_bridge = [&](int index) {
        const std::uint64_t spec_seed = derive_seed(config.master_seed, index, "spec");
        const BridgeSpec spec = generate_bridge_spec(spec_seed, config.ranges);
        const std::vector<ComponentMesh> meshes = build_bridge_meshes(spec);
        const TriangleBvh bvh =
            any_lidar ? TriangleBvh(meshes) : TriangleBvh(std::vector<ComponentMesh>{});
        const std::string split = index < train_count ? "train" : "val";

        char id_buf[64];
        if (config.export_obj) {
            std::snprintf(id_buf, sizeof id_buf, "bridge_%04d.obj", index);
            write_obj(meshes, (root / split / id_buf).string());
        }

        for (const SamplingMode mode : config.modes) {
            const LabeledPointCloud sampled =
                detail::sample_bridge(meshes, bvh, mode, config,
                                      derive_seed(config.master_seed, index, "sampling"));

            std::vector<bool> occlusion_variants;
            if (config.occlusion_enabled && config.occlusion_double)
                occlusion_variants = {false, true};
            else
                occlusion_variants = {config.occlusion_enabled};

            for (const bool occluded : occlusion_variants) {
                LabeledPointCloud cloud = sampled;
                if (occluded) {
                    const auto shapes = generate_occlusion_shapes(
                        bridge_bbox(meshes), config.occlusion_count,
                        derive_seed(config.master_seed, index, "occlusion"));
                    cloud = apply_occlusion(cloud, shapes,
                                            SparsityFactor(config.occlusion_sparsity),
                                            derive_seed(config.master_seed, index, "occlusion-apply"));
                }
                if (config.voxel_size > 0.0) cloud = voxel_downsample(cloud, config.voxel_size);
                cloud = colorize(cloud, config.color,
                                 derive_seed(config.master_seed, index, "color"));
                if (config.augment_enabled)
                    cloud = apply_standard_augmentations(
                        cloud, config.augment, derive_seed(config.master_seed, index, "augment"));

                std::string mode_name(sampling_mode_name(mode));
                for (char& ch : mode_name) ch = static_cast<char>(std::tolower(ch));
                std::snprintf(id_buf, sizeof id_buf, "bridge_%04d_%s%s", index,
                              mode_name.c_str(), occluded ? "_occ" : "");
                ManifestEntry entry;
                entry.bridge_id = id_buf;
                entry.bridge_index = index;
                entry.spec_seed = spec_seed;
                entry.mode = mode;
                entry.occlusion = {occluded, occluded ? config.occlusion_count : 0,
                                   config.occlusion_sparsity};
                entry.voxel_size = config.voxel_size;
                entry.color_scheme = std::string(color_scheme_name(config.color));
                entry.split = split;
                entry.path = split + "/" + entry.bridge_id + ".txt";
                detail::write_file_atomic(format_cloud_txt(cloud), root / entry.path);
                per_bridge[index].push_back(std::move(entry));
            }
        }
    };

    auto worker = [&] {
        for (;;) {
            const int index = next_bridge.fetch_add(1);
            if (index >= config.bridge_count) return;
            try {
                process_bridge(index);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    const int n_threads = std::max(
        1, std::min(config.bridge_count,
                    config.threads > 0 ? config.threads
                                       : static_cast<int>(std::thread::hardware_concurrency())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    DatasetManifest manifest;
    manifest.master_seed = config.master_seed;
    for (const auto& entries : per_bridge)
        manifest.entries.insert(manifest.entries.end(), entries.begin(), entries.end());
    write_manifest(manifest, (root / "manifest.json").string());
    return manifest;
}

// Union of several manifests, provenance preserved per entry. Duplicate
// (bridge_id, mode) pairs or duplicate paths are rejected.
inline DatasetManifest compose_datasets(const std::vector<DatasetManifest>& manifests) {
    if (manifests.empty()) throw argument_error("compose_datasets: need at least one manifest");
    DatasetManifest merged;
    merged.master_seed = manifests.front().master_seed;
    std::set<std::pair<std::string, std::string>> seen_id_mode;
    std::set<std::string> seen_paths;
    for (const DatasetManifest& m : manifests) {
        for (const ManifestEntry& e : m.entries) {
            if (!seen_id_mode.insert({e.bridge_id, std::string(sampling_mode_name(e.mode))}).second)
                throw config_error("compose_datasets: duplicate bridge \"" + e.bridge_id +
                                   "\" with mode " + std::string(sampling_mode_name(e.mode)));
            if (!seen_paths.insert(e.path).second)
                throw config_error("compose_datasets: duplicate path \"" + e.path + "\"");
            merged.entries.push_back(e);
        }
    }
    return merged;
}

}  // namespace bc
