#include "helpers.hpp"

#include <doctest.h>

#include <clocale>
#include <filesystem>

using namespace bc;
using namespace testutil;

static std::string slurp(const std::string& path) { return testutil::slurp_file(path); }
static void spit(const std::string& path, const std::string& text) {
    testutil::spit_file(path, text);
}

TEST_CASE("single point formats exactly as specified") {
    LabeledPointCloud cloud;
    cloud.points.push_back({{1.25, -3.4, 2.1}, {255, 255, 255}, 2, 7});
    CHECK(format_cloud_txt(cloud) == "1.250000 -3.400000 2.100000 255 255 255 2 7\n");
}

TEST_CASE("empty cloud writes an empty file") {
    TempDir dir;
    write_cloud_txt({}, dir.file("empty.txt"));
    CHECK(slurp(dir.file("empty.txt")).empty());
    CHECK(read_cloud_txt(dir.file("empty.txt")).empty());
}

TEST_CASE("write then read is the identity within 1e-6") {
    TempDir dir;
    Rng rng(71);
    LabeledPointCloud cloud;
    for (int i = 0; i < 500; ++i)
        cloud.points.push_back({{rng.uniform(-100, 100), rng.uniform(-100, 100),
                                 rng.uniform(-100, 100)},
                                {static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                                 static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                                 static_cast<std::uint8_t>(rng.uniform_int(0, 255))},
                                static_cast<std::uint8_t>(rng.uniform_int(0, 4)),
                                static_cast<std::uint32_t>(rng.uniform_int(0, 40))});
    write_cloud_txt(cloud, dir.file("cloud.txt"));
    const auto back = read_cloud_txt(dir.file("cloud.txt"));
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK(std::abs(back.points[i].position.x - cloud.points[i].position.x) <= 5e-7);
        CHECK(std::abs(back.points[i].position.y - cloud.points[i].position.y) <= 5e-7);
        CHECK(std::abs(back.points[i].position.z - cloud.points[i].position.z) <= 5e-7);
        CHECK(back.points[i].color == cloud.points[i].color);
        CHECK(back.points[i].semantic == cloud.points[i].semantic);
        CHECK(back.points[i].instance == cloud.points[i].instance);
    }
}

TEST_CASE("write-read-write produces byte-identical files") {
    TempDir dir;
    Rng rng(72);
    LabeledPointCloud cloud;
    for (int i = 0; i < 300; ++i)
        cloud.points.push_back({{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)},
                                {13, 200, 0},
                                static_cast<std::uint8_t>(rng.uniform_int(0, 4)),
                                static_cast<std::uint32_t>(i)});
    write_cloud_txt(cloud, dir.file("a.txt"));
    write_cloud_txt(read_cloud_txt(dir.file("a.txt")), dir.file("b.txt"));
    CHECK(slurp(dir.file("a.txt")) == slurp(dir.file("b.txt")));
}

TEST_CASE("reader tolerates CRLF and extra whitespace") {
    TempDir dir;
    spit(dir.file("crlf.txt"), "1.000000 2.000000 3.000000 255 255 255 0 1\r\n"
                               "  4.5\t5.5   6.5  10 20 30 4 2\r\n");
    const auto cloud = read_cloud_txt(dir.file("crlf.txt"));
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[0].position.z == doctest::Approx(3.0));
    CHECK(cloud.points[1].semantic == 4);
    CHECK(cloud.points[1].instance == 2);
}

TEST_CASE("malformed lines report their line number") {
    TempDir dir;
    SUBCASE("seven fields") {
        spit(dir.file("bad.txt"), "1.0 2.0 3.0 255 255 255 0 1\n1.0 2.0 3.0 255 255 255 0\n");
        try {
            read_cloud_txt(dir.file("bad.txt"));
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line_number == 2);
            CHECK(std::string(e.what()).find(":2:") != std::string::npos);
        }
    }
    SUBCASE("nine fields") {
        spit(dir.file("bad.txt"), "1 2 3 255 255 255 0 1 9\n");
        CHECK_THROWS_AS(read_cloud_txt(dir.file("bad.txt")), parse_error);
    }
    SUBCASE("non-numeric coordinate") {
        spit(dir.file("bad.txt"), "x 2.0 3.0 255 255 255 0 1\n");
        CHECK_THROWS_AS(read_cloud_txt(dir.file("bad.txt")), parse_error);
    }
    SUBCASE("color out of range") {
        spit(dir.file("bad.txt"), "1 2 3 256 255 255 0 1\n");
        CHECK_THROWS_AS(read_cloud_txt(dir.file("bad.txt")), parse_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_cloud_txt(dir.file("nope.txt")), io_error);
    }
}

TEST_CASE("formatting ignores the C locale") {
    // a comma-decimal locale must not leak into the canonical format
    const char* previous = std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
    LabeledPointCloud cloud;
    cloud.points.push_back({{1.5, 0, 0}, {}, 0, 0});
    const std::string line = format_cloud_txt(cloud);
    if (previous) std::setlocale(LC_NUMERIC, "C");
    CHECK(line.find("1.500000") == 0);
    CHECK(parse_cloud_txt("2.5 0 0 255 255 255 0 0\n", "mem").points[0].position.x ==
          doctest::Approx(2.5));
}

TEST_CASE("manifest round trip is lossless") {
    TempDir dir;
    DatasetManifest manifest;
    manifest.master_seed = 42;
    manifest.entries.push_back({"bridge_0000_pslp", 0, 1234, SamplingMode::pslp,
                                {true, 10, 0.6}, 0.02, "white", "train",
                                "train/bridge_0000_pslp.txt"});
    manifest.entries.push_back({"bridge_0001_msp", 1, 99, SamplingMode::msp,
                                {false, 0, 0.6}, 0.0, "height", "val",
                                "val/bridge_0001_msp.txt"});
    write_manifest(manifest, dir.file("manifest.json"));
    const auto back = read_manifest(dir.file("manifest.json"));
    CHECK(back.master_seed == 42);
    CHECK(back.tool == std::string(kToolName));
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].bridge_id == "bridge_0000_pslp");
    CHECK(back.entries[0].mode == SamplingMode::pslp);
    CHECK(back.entries[0].occlusion.enabled);
    CHECK(back.entries[0].occlusion.sparsity == doctest::Approx(0.6));
    CHECK(back.entries[1].split == "val");
    CHECK(back.entries[1].color_scheme == "height");
}

TEST_CASE("unknown manifest keys warn but do not fail") {
    TempDir dir;
    spit(dir.file("manifest.json"), R"({
        "tool": "bridgecloud", "version": "0.1.0", "master_seed": 1,
        "future_flag": true,
        "entries": [{"bridge_id": "b", "spec_seed": 2, "mode": "MSP",
                     "path": "train/b.txt", "surprise": 1}]
    })");
    std::vector<std::string> warnings;
    const auto manifest = read_manifest(dir.file("manifest.json"), &warnings);
    CHECK(manifest.entries.size() == 1);
    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0].find("future_flag") != std::string::npos);
    CHECK(warnings[1].find("surprise") != std::string::npos);
}

TEST_CASE("missing manifest keys name the key") {
    TempDir dir;
    spit(dir.file("manifest.json"), R"({
        "tool": "bridgecloud", "version": "0.1.0",
        "entries": []
    })");
    try {
        read_manifest(dir.file("manifest.json"));
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("master_seed") != std::string::npos);
    }
}

TEST_CASE("duplicate entry paths are rejected") {
    TempDir dir;
    spit(dir.file("manifest.json"), R"({
        "tool": "bridgecloud", "version": "0.1.0", "master_seed": 1,
        "entries": [
            {"bridge_id": "a", "spec_seed": 1, "mode": "MSP", "path": "t/a.txt"},
            {"bridge_id": "b", "spec_seed": 2, "mode": "MSP", "path": "t/a.txt"}
        ]
    })");
    CHECK_THROWS_AS(read_manifest(dir.file("manifest.json")), parse_error);
}
