#include "helpers.hpp"

#include <doctest.h>

using namespace bc;
using namespace testutil;

namespace {

// Small, quick pipeline setup shared by the tests.
PipelineConfig quick_config(const std::string& out_dir) {
    PipelineConfig config;
    config.bridge_count = 3;
    config.master_seed = 5;
    config.modes = {SamplingMode::pslp};
    config.lidar.horizontal_resolution = config.lidar.vertical_resolution = 6.0;
    config.msp_density = 30.0;
    config.voxel_size = 0.05;
    config.train_fraction = 2.0 / 3.0;
    config.out_dir = out_dir;
    return config;
}

std::map<std::string, std::string> tree_contents(const std::filesystem::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            files[std::filesystem::relative(entry.path(), root).string()] =
                slurp_file(entry.path().string());
    return files;
}

}  // namespace

TEST_CASE("pipeline writes the split layout and manifest") {
    TempDir dir;
    PipelineConfig config = quick_config(dir.file("out"));
    const DatasetManifest manifest = run_pipeline(config);

    REQUIRE(manifest.entries.size() == 3);
    int train = 0, val = 0;
    for (const auto& e : manifest.entries) {
        (e.split == "train" ? train : val)++;
        CHECK(std::filesystem::exists(std::filesystem::path(config.out_dir) / e.path));
        CHECK(!read_cloud_txt((std::filesystem::path(config.out_dir) / e.path).string()).empty());
    }
    CHECK(train == 2);
    CHECK(val == 1);
    CHECK(std::filesystem::exists(dir.file("out/manifest.json")));

    const DatasetManifest back = read_manifest(dir.file("out/manifest.json"));
    CHECK(back.entries.size() == manifest.entries.size());
    CHECK(back.master_seed == 5);
}

TEST_CASE("pipeline emits one file per mode per bridge") {
    TempDir dir;
    PipelineConfig config = quick_config(dir.file("out"));
    config.bridge_count = 2;
    config.modes = {SamplingMode::pslp, SamplingMode::rslp};
    const DatasetManifest manifest = run_pipeline(config);
    CHECK(manifest.entries.size() == 4);  // 2 bridges x 2 modes

    std::map<SamplingMode, int> per_mode;
    for (const auto& e : manifest.entries) ++per_mode[e.mode];
    CHECK(per_mode[SamplingMode::pslp] == 2);
    CHECK(per_mode[SamplingMode::rslp] == 2);
}

TEST_CASE("occlusion doubling emits clean and occluded variants") {
    TempDir dir;
    PipelineConfig config = quick_config(dir.file("out"));
    config.bridge_count = 1;
    config.occlusion_enabled = true;
    config.occlusion_double = true;
    config.occlusion_count = 6;
    config.occlusion_sparsity = 0.6;
    const DatasetManifest manifest = run_pipeline(config);
    REQUIRE(manifest.entries.size() == 2);
    CHECK_FALSE(manifest.entries[0].occlusion.enabled);
    CHECK(manifest.entries[1].occlusion.enabled);
    CHECK(manifest.entries[1].occlusion.sparsity == doctest::Approx(0.6));
    CHECK(manifest.entries[1].bridge_id.find("_occ") != std::string::npos);

    const auto clean = read_cloud_txt(
        (std::filesystem::path(config.out_dir) / manifest.entries[0].path).string());
    const auto occluded = read_cloud_txt(
        (std::filesystem::path(config.out_dir) / manifest.entries[1].path).string());
    CHECK(occluded.size() < clean.size());
}

TEST_CASE("identical configs produce byte-identical trees regardless of threads") {
    TempDir dir;
    PipelineConfig a = quick_config(dir.file("a"));
    a.threads = 1;
    PipelineConfig b = quick_config(dir.file("b"));
    b.threads = 3;
    run_pipeline(a);
    run_pipeline(b);
    const auto ta = tree_contents(dir.file("a"));
    const auto tb = tree_contents(dir.file("b"));
    REQUIRE(!ta.empty());
    CHECK(ta == tb);
}

TEST_CASE("per-bridge streams are isolated: a prefix regenerates identically") {
    TempDir dir;
    PipelineConfig full = quick_config(dir.file("full"));
    full.bridge_count = 3;
    PipelineConfig prefix = quick_config(dir.file("prefix"));
    prefix.bridge_count = 2;
    run_pipeline(full);
    run_pipeline(prefix);
    // index by file name: the split a bridge lands in depends on the total
    // count, its contents must not
    auto by_name = [](const std::filesystem::path& root) {
        std::map<std::string, std::string> files;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
            if (entry.is_regular_file())
                files[entry.path().filename().string()] = slurp_file(entry.path().string());
        return files;
    };
    const auto t_full = by_name(dir.file("full"));
    const auto t_prefix = by_name(dir.file("prefix"));
    for (const auto& [name, contents] : t_prefix) {
        if (name == "manifest.json") continue;  // differs by entry count
        INFO(name);
        REQUIRE(t_full.count(name) == 1);
        CHECK(t_full.at(name) == contents);
    }
}

TEST_CASE("pipeline validates its configuration") {
    PipelineConfig config = quick_config("unused");
    config.bridge_count = 0;
    CHECK_THROWS_AS(run_pipeline(config), config_error);

    config = quick_config("unused");
    config.modes = {};
    CHECK_THROWS_AS(run_pipeline(config), config_error);

    config = quick_config("unused");
    config.modes = {SamplingMode::pslp, SamplingMode::pslp};
    CHECK_THROWS_AS(run_pipeline(config), config_error);

    config = quick_config("unused");
    config.train_fraction = 1.4;
    CHECK_THROWS_AS(run_pipeline(config), config_error);

    config = quick_config("");
    CHECK_THROWS_AS(run_pipeline(config), config_error);
}

TEST_CASE("MSP mode flows through the same pipeline") {
    TempDir dir;
    PipelineConfig config = quick_config(dir.file("out"));
    config.bridge_count = 1;
    config.modes = {SamplingMode::msp};
    config.voxel_size = 0.0;  // keep raw sampling
    const DatasetManifest manifest = run_pipeline(config);
    REQUIRE(manifest.entries.size() == 1);
    const auto cloud = read_cloud_txt(
        (std::filesystem::path(config.out_dir) / manifest.entries[0].path).string());
    CHECK(!cloud.empty());
    // MSP touches interior/contact faces, so it must out-sample a coarse scan
    std::set<int> classes;
    for (const auto& p : cloud.points) classes.insert(p.semantic);
    CHECK(classes.size() == 5);
}

TEST_CASE("compose unions manifests and rejects collisions") {
    DatasetManifest a;
    a.master_seed = 1;
    a.entries.push_back({"bridge_0000_pslp", 0, 11, SamplingMode::pslp, {}, 0.02, "white",
                         "train", "a/train/bridge_0000_pslp.txt"});
    DatasetManifest b;
    b.master_seed = 2;
    b.entries.push_back({"bridge_0000_rslp", 0, 11, SamplingMode::rslp, {}, 0.02, "white",
                         "train", "b/train/bridge_0000_rslp.txt"});

    SUBCASE("single manifest composes to itself") {
        const DatasetManifest merged = compose_datasets({a});
        CHECK(merged.entries.size() == 1);
        CHECK(merged.entries[0].bridge_id == "bridge_0000_pslp");
    }
    SUBCASE("two manifests union their entries") {
        const DatasetManifest merged = compose_datasets({a, b});
        CHECK(merged.entries.size() == 2);
    }
    SUBCASE("duplicate bridge and mode collide") {
        DatasetManifest dup = a;
        dup.entries[0].path = "elsewhere.txt";
        CHECK_THROWS_AS(compose_datasets({a, dup}), config_error);
    }
    SUBCASE("duplicate paths collide") {
        DatasetManifest dup = b;
        dup.entries[0].bridge_id = "bridge_0099_rslp";
        dup.entries[0].path = a.entries[0].path;
        CHECK_THROWS_AS(compose_datasets({a, dup}), config_error);
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(compose_datasets({}), argument_error);
    }
}

TEST_CASE("composing PSLP and RSLP datasets doubles the entries") {
    TempDir dir;
    PipelineConfig pslp = quick_config(dir.file("pslp"));
    pslp.bridge_count = 2;
    PipelineConfig rslp = quick_config(dir.file("rslp"));
    rslp.bridge_count = 2;
    rslp.modes = {SamplingMode::rslp};
    const DatasetManifest merged =
        compose_datasets({run_pipeline(pslp), run_pipeline(rslp)});
    CHECK(merged.entries.size() == 4);
}
