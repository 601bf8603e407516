#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hdrv/image.hpp"
#include "hdrv/manifest.hpp"
#include "hdrv/metrics.hpp"
#include "support/synthetic.hpp"

using namespace hdrv;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HDRV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "hdrv_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// frame directories with stacks rendered from a moving synthetic scene
void write_scene(const fs::path& scene_dir, const testsup::SyntheticScene& scene,
                 const std::vector<int>& evs) {
    for (size_t i = 0; i < scene.truth.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03zu", i);
        const fs::path dir = scene_dir / name;
        fs::create_directories(dir);
        StackMetadata meta;
        meta.frame = static_cast<int>(i);
        const MultiExposureStack stack = simulate_exposure_stack(scene.truth[i], evs, 16, 0.0);
        for (const auto& [spec, img] : stack.shots) {
            char shot[32];
            std::snprintf(shot, sizeof shot, "ev%+d.png", spec.ev);
            save_image(img, dir / shot, 16);
            meta.shots.push_back({spec.ev, spec.time_s, shot});
        }
        save_stack_metadata(meta, dir / kStackMetadataFile);
    }
}

uint64_t file_hash(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    uint64_t h = 1469598103934665603ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

TEST_CASE("merge: writes a faithful HDR and honors --dry-run") {
    const fs::path dir = fresh_dir("merge");
    const Image truth = testsup::make_radiance_field(48, 64, 5);
    testsup::SyntheticScene scene;
    scene.truth = {truth};
    write_scene(dir, scene, {-3, -2, -1, 0, 1, 2, 3});

    const fs::path out = dir / "merged.pfm";
    CHECK(run_cli("merge " + (dir / "frame_000").string() + " " + out.string()) == 0);
    REQUIRE(fs::exists(out));
    const Image merged = load_image(out, Domain::LinearHdr);
    size_t good = 0;
    for (size_t i = 0; i < truth.data.size(); ++i)
        if (std::abs(merged.data[i] - truth.data[i]) / std::max(1e-6f, truth.data[i]) < 0.01f)
            ++good;
    CHECK(good > truth.data.size() * 9 / 10);

    const fs::path dry = dir / "dry.pfm";
    CHECK(run_cli("merge --dry-run " + (dir / "frame_000").string() + " " + dry.string()) == 0);
    CHECK_FALSE(fs::exists(dry));

    CHECK(run_cli("merge " + (dir / "nonexistent").string() + " " + out.string()) == 2);
}

TEST_CASE("sequence: patterns and validation") {
    const fs::path dir = fresh_dir("sequence");
    const testsup::SyntheticScene scene = testsup::make_global_motion_scene(11, 4, 48, 64, 2, 1);
    write_scene(dir, scene, {-3, -2, -1, 0, 1, 2, 3});

    const fs::path manifest = dir / "seq.json";
    CHECK(run_cli("sequence " + dir.string() + " -3,0 " + manifest.string()) == 0);
    const SequenceManifest m = load_sequence_manifest(manifest);
    REQUIRE(m.frames.size() == 4);
    CHECK(m.pattern == std::vector<int>{-3, 0});
    for (size_t i = 0; i < m.frames.size(); ++i)
        CHECK(m.frames[i].ev == (i % 2 == 0 ? -3 : 0));
    // frames load relative to the manifest
    const AlternatingSequence seq = load_sequence(m, dir);
    CHECK(seq.frames.size() == 4);

    CHECK(run_cli("sequence " + dir.string() + " -1,+2 " + manifest.string()) == 0);
    const SequenceManifest m2 = load_sequence_manifest(manifest);
    for (size_t i = 0; i < m2.frames.size(); ++i)
        CHECK(m2.frames[i].ev == (i % 2 == 0 ? -1 : 2));

    CHECK(run_cli("sequence " + dir.string() + " 0,0 " + manifest.string()) == 2);
    CHECK(run_cli("sequence " + dir.string() + " -3,5 " + manifest.string()) == 2);
}

TEST_CASE("reconstruct: outputs, report, worker determinism") {
    const fs::path dir = fresh_dir("reconstruct");
    const testsup::SyntheticScene scene = testsup::make_global_motion_scene(13, 4, 64, 96, 2, 1);
    write_scene(dir, scene, {-3, 0});
    const fs::path manifest = dir / "seq.json";
    REQUIRE(run_cli("sequence " + dir.string() + " -3,0 " + manifest.string()) == 0);

    const std::string fast_flags = " --g-iters 10 --radius 4 ";
    const fs::path out1 = dir / "out_w1";
    const fs::path out4 = dir / "out_w4";
    CHECK(run_cli("reconstruct --workers 1" + fast_flags + manifest.string() + " " +
                  out1.string()) == 0);
    CHECK(run_cli("reconstruct --workers 4" + fast_flags + manifest.string() + " " +
                  out4.string()) == 0);

    for (int i = 0; i < 4; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.pfm", i);
        REQUIRE(fs::exists(out1 / name));
        CHECK(file_hash(out1 / name) == file_hash(out4 / name));
    }

    std::ifstream rep(out1 / "report.json");
    REQUIRE(rep.good());
    const json report = json::parse(rep);
    CHECK(report.at("frames").size() == 4);
    CHECK(report.at("frames")[0].at("global_alpha_prev").size() == 8);
    CHECK(report.contains("input_hash"));
    CHECK(report.at("config").at("align") == true);

    // --no-align is accepted and echoed
    const fs::path outb = dir / "out_baseline";
    CHECK(run_cli("reconstruct --no-align" + fast_flags + manifest.string() + " " +
                  outb.string()) == 0);
    std::ifstream repb(outb / "report.json");
    CHECK(json::parse(repb).at("config").at("align") == false);
}

TEST_CASE("eval and stats: identity scores, error contracts") {
    const fs::path dir = fresh_dir("eval");
    const fs::path est = dir / "est";
    const fs::path tru = dir / "tru";
    fs::create_directories(est);
    fs::create_directories(tru);
    for (int i = 0; i < 3; ++i) {
        const Image hdr = testsup::make_radiance_field(32, 32, 100 + i);
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.pfm", i);
        save_image(hdr, est / name);
        save_image(hdr, tru / name);
    }

    const fs::path csv = dir / "quality.csv";
    CHECK(run_cli("eval " + est.string() + " " + tru.string() + " " + csv.string()) == 0);
    std::ifstream in(csv);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "frame_id,psnr_mu,ssim_mu,pu_psnr,pu_ssim");
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.rfind("frame_", 0) == 0) {
            CHECK(line.find(",99,") != std::string::npos); // capped psnr
            CHECK(line.find(",1,") != std::string::npos);  // ssim 1.0
            ++rows;
        }
    }
    CHECK(rows == 3);
    CHECK(fs::exists(dir / "quality.json"));

    // count mismatch names the unmatched frame
    save_image(testsup::make_radiance_field(32, 32, 200), est / "frame_9999.pfm");
    CHECK(run_cli("eval " + est.string() + " " + tru.string() + " " + csv.string()) == 2);
    fs::remove(est / "frame_9999.pfm");

    // stats: constant image row has stdl 0 and dr 0
    const fs::path sdir = dir / "stats_in";
    fs::create_directories(sdir);
    save_image(Image(32, 32, 3, Domain::LinearHdr, 0.25f), sdir / "const.pfm");
    const fs::path scsv = dir / "stats.csv";
    CHECK(run_cli("stats " + sdir.string() + " " + scsv.string()) == 0);
    std::ifstream sin(scsv);
    std::getline(sin, header);
    CHECK(header == "frame_id,fhlp,ehl,si,cf,stdl,all,dr");
    std::getline(sin, line);
    // constant: full highlight fraction, zero spread, zero dynamic range
    CHECK(line == "const,1,1,0,0,0,1,0");
    // malformed pfm in the directory -> validation failure naming the file
    std::ofstream(sdir / "broken.pfm") << "PF\ngarbage";
    CHECK(run_cli("stats " + sdir.string() + " " + scsv.string()) == 2);
}

TEST_CASE("config file values apply when flags are absent") {
    const fs::path dir = fresh_dir("config");
    const testsup::SyntheticScene scene = testsup::make_global_motion_scene(17, 3, 48, 64, 1, 1);
    write_scene(dir, scene, {-3, 0});
    const fs::path manifest = dir / "seq.json";
    REQUIRE(run_cli("sequence " + dir.string() + " -3,0 " + manifest.string()) == 0);

    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << R"({"g_iters": 5, "radius": 3})";
    const fs::path out = dir / "out";
    CHECK(run_cli("reconstruct --config " + cfg.string() + " " + manifest.string() + " " +
                  out.string()) == 0);
    std::ifstream rep(out / "report.json");
    const json report = json::parse(rep);
    CHECK(report.at("config").at("g_iters") == 5);
    CHECK(report.at("config").at("radius") == 3);

    // flags override the file
    const fs::path out2 = dir / "out2";
    CHECK(run_cli("reconstruct --config " + cfg.string() + " --radius 4 " + manifest.string() +
                  " " + out2.string()) == 0);
    std::ifstream rep2(out2 / "report.json");
    CHECK(json::parse(rep2).at("config").at("radius") == 4);
}
