// bridgecloud command-line front end.
//
// Subcommands: generate (dataset pipeline), occlude / voxelize / colorize /
// augment / crop (single-cloud transforms), eval (AP scoring), baseline
// (DBSCAN segmenter), compose (manifest union).
//
// Exit codes: 0 success, 1 usage/configuration error, 2 runtime error.
// Results go to stdout, diagnostics to stderr.
#include "bridgecloud/bridgecloud.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace bc;

std::vector<SamplingMode> parse_modes(const std::string& csv) {
    std::vector<SamplingMode> modes;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const std::size_t comma = csv.find(',', start);
        const std::string token =
            csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!token.empty()) modes.push_back(sampling_mode_from_name(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (modes.empty()) throw config_error("--modes: expected a list like msp,rslp,pslp");
    return modes;
}

// "52/8" style counts act as a train:val ratio; a bare number is the train
// fraction directly.
double parse_split(const std::string& text) {
    const std::size_t slash = text.find('/');
    if (slash == std::string::npos) {
        const double fraction = std::stod(text);
        if (!(fraction >= 0.0 && fraction <= 1.0))
            throw config_error("--split: fraction must be in [0,1]");
        return fraction;
    }
    const int train = std::stoi(text.substr(0, slash));
    const int val = std::stoi(text.substr(slash + 1));
    if (train < 0 || val < 0 || train + val == 0)
        throw config_error("--split: counts must be non-negative and not both zero");
    return static_cast<double>(train) / (train + val);
}

LabeledPointCloud load_cloud(const std::string& path) {
    const LabeledPointCloud cloud = read_cloud_txt(path);
    std::cerr << path << ": " << cloud.size() << " points\n";
    return cloud;
}

void echo_counts(std::size_t before, std::size_t after) {
    std::cout << "points: " << before << " -> " << after << "\n";
}

// Instances for the gt side (always a labeled .txt cloud) and the pred side
// (either a labeled .txt cloud or a prediction .json with confidences).
std::vector<InstancePrediction> load_predictions(const std::string& path,
                                                 std::size_t gt_points) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        std::size_t declared = 0;
        auto preds = read_predictions_json(path, &declared);
        if (declared != 0 && declared != gt_points)
            throw argument_error("prediction file covers " + std::to_string(declared) +
                                 " points but the ground truth has " + std::to_string(gt_points));
        return preds;
    }
    const LabeledPointCloud cloud = read_cloud_txt(path);
    if (cloud.size() != gt_points)
        throw argument_error("prediction cloud has " + std::to_string(cloud.size()) +
                             " points but the ground truth has " + std::to_string(gt_points));
    return predictions_from_labels(cloud);
}

// ---------------------------------------------------------------------------
// subcommand wiring
// ---------------------------------------------------------------------------

struct GenerateArgs {
    int count = 1;
    std::uint64_t seed = 0;
    std::string modes = "pslp";
    double occlusion_sparsity = 0.6;
    int occlusion_count = 0;
    bool occlusion_double = false;
    double voxel_size = 0.02;
    std::string color = "white";
    std::string split = "52/8";
    std::string out;
    double resolution = 0.4;
    bool fast = false;
    double density = 1000.0;
    bool augment = false;
    bool export_obj = false;
    int threads = 0;
    int pslp_rows = 4, pslp_cols = 8;
};

int cmd_generate(const GenerateArgs& args) {
    PipelineConfig config;
    config.bridge_count = args.count;
    config.master_seed = args.seed;
    config.modes = parse_modes(args.modes);
    config.occlusion_enabled = args.occlusion_count > 0;
    config.occlusion_count = args.occlusion_count;
    config.occlusion_sparsity = args.occlusion_sparsity;
    config.occlusion_double = args.occlusion_double;
    config.voxel_size = args.voxel_size;
    config.color = color_scheme_from_name(args.color);
    config.augment_enabled = args.augment;
    config.train_fraction = parse_split(args.split);
    config.out_dir = args.out;
    config.msp_density = args.density;
    const double res = args.fast ? 2.0 : args.resolution;
    config.lidar.horizontal_resolution = config.lidar.vertical_resolution = res;
    config.pslp.rows = args.pslp_rows;
    config.pslp.cols = args.pslp_cols;
    config.export_obj = args.export_obj;
    config.threads = args.threads;

    const DatasetManifest manifest = run_pipeline(config);
    std::cerr << "wrote " << manifest.entries.size() << " clouds\n";
    std::cout << (std::filesystem::path(args.out) / "manifest.json").string() << "\n";
    return 0;
}

int cmd_occlude(const std::string& in, const std::string& out, double sparsity, int count,
                std::uint64_t seed) {
    const LabeledPointCloud cloud = load_cloud(in);
    const auto shapes = generate_occlusion_shapes(cloud_bbox(cloud), count, seed);
    const auto result =
        apply_occlusion(cloud, shapes, SparsityFactor(sparsity), derive_seed(seed, 0, "occlude"));
    write_cloud_txt(result, out);
    echo_counts(cloud.size(), result.size());
    return 0;
}

int cmd_voxelize(const std::string& in, const std::string& out, double size) {
    const LabeledPointCloud cloud = load_cloud(in);
    const auto result = voxel_downsample(cloud, size);
    write_cloud_txt(result, out);
    echo_counts(cloud.size(), result.size());
    return 0;
}

int cmd_colorize(const std::string& in, const std::string& out, const std::string& scheme,
                 std::uint64_t seed) {
    const LabeledPointCloud cloud = load_cloud(in);
    const auto result = colorize(cloud, color_scheme_from_name(scheme), seed);
    write_cloud_txt(result, out);
    echo_counts(cloud.size(), result.size());
    return 0;
}

int cmd_augment(const std::string& in, const std::string& out, std::uint64_t seed,
                double scale_min, double scale_max, double tilt, double z_max, double flip_p) {
    const LabeledPointCloud cloud = load_cloud(in);
    AugmentConfig config;
    config.scale_min = scale_min;
    config.scale_max = scale_max;
    config.xy_tilt_max_deg = tilt;
    config.z_rotation_max_deg = z_max;
    config.flip_probability = flip_p;
    const auto result = apply_standard_augmentations(cloud, config, seed);
    write_cloud_txt(result, out);
    echo_counts(cloud.size(), result.size());
    return 0;
}

int cmd_crop(const std::string& in, const std::string& out_prefix, double bx, double by,
             double bz) {
    const LabeledPointCloud cloud = load_cloud(in);
    const auto blocks = crop_blocks(cloud, {bx, by, bz});
    char suffix[32];
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        std::snprintf(suffix, sizeof suffix, "_%03zu.txt", i);
        write_cloud_txt(blocks[i], out_prefix + suffix);
    }
    std::cout << "blocks: " << blocks.size() << "\n";
    echo_counts(cloud.size(), cloud.size());
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& json_out, const std::string& label) {
    const LabeledPointCloud gt_cloud = read_cloud_txt(gt_path);
    const auto gts = instances_from_labels(gt_cloud);
    const auto preds = load_predictions(pred_path, gt_cloud.size());
    const EvalReport report = evaluate_ap(preds, gts);

    const std::string row_label =
        label.empty() ? std::filesystem::path(pred_path).stem().string() : label;
    std::cout << format_report_table({{row_label, report}});
    if (!json_out.empty()) {
        std::ofstream out(json_out, std::ios::binary);
        if (!out) throw io_error("cannot open " + json_out);
        out << report_to_json(report).dump(2) << "\n";
    }
    return 0;
}

int cmd_baseline(const std::string& in, const std::string& out, double eps, int min_pts,
                 bool refine) {
    const LabeledPointCloud cloud = load_cloud(in);
    const DbscanParams params{eps, min_pts};
    auto preds = baseline_segment(cloud, params);
    if (refine) preds = refine_instances_dbscan(cloud, preds, params);

    std::map<int, int> per_class;
    for (const auto& p : preds) ++per_class[p.class_label];
    for (const auto& [cls, n] : per_class)
        std::cout << semantic_class_name(static_cast<SemanticClass>(cls)) << ": " << n
                  << " instances\n";
    if (!out.empty()) write_predictions_json(preds, cloud.size(), out);
    return 0;
}

int cmd_compose(const std::string& out, const std::vector<std::string>& manifest_paths) {
    namespace fs = std::filesystem;
    std::vector<DatasetManifest> manifests;
    for (const std::string& path : manifest_paths) {
        DatasetManifest m = read_manifest(path);
        // re-root entry paths relative to the composed manifest
        const fs::path base = fs::absolute(fs::path(path)).parent_path();
        const fs::path out_base = fs::absolute(fs::path(out)).parent_path();
        for (ManifestEntry& e : m.entries)
            e.path = fs::relative(base / e.path, out_base).string();
        manifests.push_back(std::move(m));
    }
    const DatasetManifest merged = compose_datasets(manifests);
    write_manifest(merged, out);
    std::cerr << "composed " << merged.entries.size() << " entries\n";
    std::cout << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic RC bridge point clouds: generation, augmentation, evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(bc::kToolVersion));

    // generate
    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Run the dataset pipeline");
    generate->add_option("--count", gen.count, "Number of bridges")->capture_default_str();
    generate->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
    generate->add_option("--modes", gen.modes, "Comma list of msp,rslp,pslp")
        ->capture_default_str();
    generate->add_option("--occlusion-sparsity", gen.occlusion_sparsity,
                         "Fraction of in-shape points removed")
        ->capture_default_str();
    generate->add_option("--occlusion-count", gen.occlusion_count,
                         "Occlusion shapes per bridge (0 disables occlusion)")
        ->capture_default_str();
    generate->add_flag("--occlusion-double", gen.occlusion_double,
                       "Emit clean and occluded variants of every bridge");
    generate->add_option("--voxel-size", gen.voxel_size, "Voxel size in meters (0 disables)")
        ->capture_default_str();
    generate->add_option("--color", gen.color, "Color scheme: white|random|height")
        ->capture_default_str();
    generate->add_option("--split", gen.split, "Train/val as counts (52/8) or fraction (0.87)")
        ->capture_default_str();
    generate->add_option("--out", gen.out, "Output dataset directory")->required();
    generate->add_option("--resolution", gen.resolution, "LiDAR angular resolution in degrees")
        ->capture_default_str();
    generate->add_flag("--fast", gen.fast, "Coarse 2-degree LiDAR preset for quick runs");
    generate->add_option("--density", gen.density, "MSP sampling density in points per m^2")
        ->capture_default_str();
    generate->add_flag("--augment", gen.augment, "Apply random scale/rotate/flip to each cloud");
    generate->add_flag("--export-obj", gen.export_obj, "Also write per-bridge OBJ meshes");
    generate->add_option("--threads", gen.threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
    generate->add_option("--pslp-rows", gen.pslp_rows, "PSLP grid rows (4-6)")
        ->capture_default_str();
    generate->add_option("--pslp-cols", gen.pslp_cols, "PSLP grid columns (8-12)")
        ->capture_default_str();

    // transforms
    std::string in_path, out_path;
    double sparsity = 0.6;
    int shape_count = 10;
    std::uint64_t seed = 0;
    auto* occlude = app.add_subcommand("occlude", "Sparsify points inside random shapes");
    occlude->add_option("--sparsity", sparsity, "Fraction removed inside shapes")
        ->capture_default_str();
    occlude->add_option("--count", shape_count, "Number of occlusion shapes")
        ->capture_default_str();
    occlude->add_option("--seed", seed, "Seed")->capture_default_str();
    occlude->add_option("input", in_path, "Input .txt cloud")->required();
    occlude->add_option("output", out_path, "Output .txt cloud")->required();

    double voxel_size = 0.02;
    std::string voxel_preset;
    auto* voxelize = app.add_subcommand("voxelize", "Keep one representative point per voxel");
    voxelize->add_option("--size", voxel_size, "Voxel size in meters")->capture_default_str();
    voxelize->add_option("--preset", voxel_preset,
                         "Named size: pre (0.02 m cleanup) or model (0.2 m)");
    voxelize->add_option("input", in_path, "Input .txt cloud")->required();
    voxelize->add_option("output", out_path, "Output .txt cloud")->required();

    std::string scheme = "white";
    auto* colorize_cmd = app.add_subcommand("colorize", "Recolor a cloud");
    colorize_cmd->add_option("--scheme", scheme, "white|random|height")->capture_default_str();
    colorize_cmd->add_option("--seed", seed, "Seed")->capture_default_str();
    colorize_cmd->add_option("input", in_path, "Input .txt cloud")->required();
    colorize_cmd->add_option("output", out_path, "Output .txt cloud")->required();

    double scale_min = 0.9, scale_max = 1.1, tilt = 5.0, z_max = 360.0, flip_p = 0.5;
    auto* augment_cmd = app.add_subcommand("augment", "Random scale, rotation, and flip");
    augment_cmd->add_option("--seed", seed, "Seed")->capture_default_str();
    augment_cmd->add_option("--scale-min", scale_min, "Lower scale bound")->capture_default_str();
    augment_cmd->add_option("--scale-max", scale_max, "Upper scale bound")->capture_default_str();
    augment_cmd->add_option("--tilt", tilt, "Max tilt about x/y in degrees")
        ->capture_default_str();
    augment_cmd->add_option("--z-rotation", z_max, "Max rotation about z in degrees")
        ->capture_default_str();
    augment_cmd->add_option("--flip-probability", flip_p, "Probability of a horizontal flip")
        ->capture_default_str();
    augment_cmd->add_option("input", in_path, "Input .txt cloud")->required();
    augment_cmd->add_option("output", out_path, "Output .txt cloud")->required();

    double bx = 10, by = 10, bz = 10;
    auto* crop = app.add_subcommand("crop", "Split a cloud into equal blocks");
    crop->add_option("--block-x", bx, "Block extent along x")->capture_default_str();
    crop->add_option("--block-y", by, "Block extent along y")->capture_default_str();
    crop->add_option("--block-z", bz, "Block extent along z")->capture_default_str();
    crop->add_option("input", in_path, "Input .txt cloud")->required();
    crop->add_option("output", out_path, "Output prefix; blocks land in <prefix>_NNN.txt")
        ->required();

    // eval
    std::string pred_path, gt_path, json_out, label;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
    eval_cmd->add_option("--pred", pred_path, "Prediction .txt cloud or .json file")->required();
    eval_cmd->add_option("--gt", gt_path, "Ground-truth .txt cloud")->required();
    eval_cmd->add_option("--json-out", json_out, "Also write the report as JSON");
    eval_cmd->add_option("--label", label, "Row label for the report table");

    // baseline
    std::string baseline_in, baseline_out;
    double eps = 0.92;
    int min_pts = 4;
    bool refine = false;
    auto* baseline = app.add_subcommand("baseline", "DBSCAN instance segmenter");
    baseline->add_option("--in", baseline_in, "Labeled .txt cloud")->required();
    baseline->add_option("--out", baseline_out, "Write predictions as JSON");
    baseline->add_option("--eps", eps, "DBSCAN epsilon in meters")->capture_default_str();
    baseline->add_option("--min-pts", min_pts, "DBSCAN minimum neighborhood size")
        ->capture_default_str();
    baseline->add_flag("--refine", refine, "Re-cluster each prediction before writing");

    // compose
    std::string compose_out;
    std::vector<std::string> compose_inputs;
    auto* compose = app.add_subcommand("compose", "Union several dataset manifests");
    compose->add_option("--out", compose_out, "Path of the merged manifest")->required();
    compose->add_option("manifests", compose_inputs, "Input manifest.json files")
        ->required()
        ->expected(-1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*generate) return cmd_generate(gen);
        if (*occlude) return cmd_occlude(in_path, out_path, sparsity, shape_count, seed);
        if (*voxelize) {
            if (!voxel_preset.empty()) {
                if (voxel_preset == "pre") voxel_size = 0.02;
                else if (voxel_preset == "model") voxel_size = 0.2;
                else throw bc::config_error("--preset: expected pre or model");
            }
            return cmd_voxelize(in_path, out_path, voxel_size);
        }
        if (*colorize_cmd) return cmd_colorize(in_path, out_path, scheme, seed);
        if (*augment_cmd)
            return cmd_augment(in_path, out_path, seed, scale_min, scale_max, tilt, z_max, flip_p);
        if (*crop) return cmd_crop(in_path, out_path, bx, by, bz);
        if (*eval_cmd) return cmd_eval(pred_path, gt_path, json_out, label);
        if (*baseline) return cmd_baseline(baseline_in, baseline_out, eps, min_pts, refine);
        if (*compose) return cmd_compose(compose_out, compose_inputs);
    } catch (const bc::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
