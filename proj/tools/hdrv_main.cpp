// hdrv - batch HDR video reconstruction and evaluation tool

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hdrv/errors.hpp"
#include "hdrv/manifest.hpp"
#include "hdrv/metrics.hpp"
#include "hdrv/reconstruct.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

// FNV-1a over file bytes; reports embed it so runs are self-documenting.
uint64_t fnv1a_file(const fs::path& path, uint64_t h = 0xcbf29ce484222325ull) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw hdrv::DecodeError(path.string() + ": cannot open for hashing");
    char buf[8192];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!in) break;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<fs::path> list_pfm_sorted(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw std::invalid_argument(dir.string() + ": not a directory");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pfm") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> parse_pattern(const std::string& text) {
    std::vector<int> pattern;
    std::string tok;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            if (tok.empty())
                throw std::invalid_argument("pattern: empty element in '" + text + "'");
            pattern.push_back(std::stoi(tok));
            tok.clear();
        } else {
            tok.push_back(text[i]);
        }
    }
    if (pattern.size() < 2)
        throw std::invalid_argument("pattern: need at least 2 comma-separated EVs");
    for (size_t k = 0; k < pattern.size(); ++k)
        if (pattern[k] == pattern[(k + 1) % pattern.size()])
            throw std::invalid_argument("pattern: adjacent EVs must differ");
    return pattern;
}

struct GlobalFlags {
    std::string config_path;
    int workers = 1;
    uint64_t seed = 0;
    bool dump_intermediates = false;
    json config; // parsed --config file, {} when absent
};

// flag > config file > built-in default
template <typename T>
T resolved(const CLI::Option* opt, const json& cfg, const char* key, T current) {
    if (opt && opt->count() > 0) return current;
    if (cfg.contains(key)) return cfg.at(key).get<T>();
    return current;
}

json flags_json(const GlobalFlags& g) {
    return json{{"workers", g.workers},
                {"seed", g.seed},
                {"dump_intermediates", g.dump_intermediates},
                {"config", g.config_path}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    out << text << "\n";
}

int cmd_merge(const fs::path& stack_dir, const fs::path& out_path, bool dry_run) {
    const fs::path meta_path = stack_dir / hdrv::kStackMetadataFile;
    if (!fs::exists(meta_path))
        throw hdrv::DecodeError(meta_path.string() + ": stack metadata not found");
    const hdrv::MultiExposureStack stack = hdrv::load_stack(stack_dir);
    std::string evs;
    for (const auto& [spec, img] : stack.shots)
        evs += (evs.empty() ? "" : ",") + std::to_string(spec.ev);
    const hdrv::Image hdr = hdrv::merge_stack_to_hdr(stack);
    if (dry_run) {
        std::printf("stack %s: frame %d, %zu shots (EV %s), %dx%d — dry run, nothing written\n",
                    stack_dir.string().c_str(), stack.frame_id, stack.shots.size(), evs.c_str(),
                    hdr.width, hdr.height);
        return kExitOk;
    }
    hdrv::save_image(hdr, out_path);
    std::printf("stack %s: frame %d, %zu shots (EV %s), merged %dx%d -> %s\n",
                stack_dir.string().c_str(), stack.frame_id, stack.shots.size(), evs.c_str(),
                hdr.width, hdr.height, out_path.string().c_str());
    return kExitOk;
}

int cmd_sequence(const fs::path& scene_dir, const std::string& pattern_text,
                 const fs::path& out_manifest) {
    const std::vector<int> pattern = parse_pattern(pattern_text);
    if (!fs::is_directory(scene_dir))
        throw std::invalid_argument(scene_dir.string() + ": not a directory");

    std::vector<fs::path> frame_dirs;
    for (const auto& e : fs::directory_iterator(scene_dir))
        if (e.is_directory() && fs::exists(e.path() / hdrv::kStackMetadataFile))
            frame_dirs.push_back(e.path());
    std::sort(frame_dirs.begin(), frame_dirs.end());
    if (frame_dirs.empty())
        throw std::invalid_argument(scene_dir.string() + ": no frame directories with " +
                                    hdrv::kStackMetadataFile);

    const fs::path base = out_manifest.parent_path().empty() ? fs::path(".")
                                                             : out_manifest.parent_path();
    hdrv::SequenceManifest manifest;
    manifest.pattern = pattern;
    for (size_t i = 0; i < frame_dirs.size(); ++i) {
        const hdrv::StackMetadata meta =
            hdrv::load_stack_metadata(frame_dirs[i] / hdrv::kStackMetadataFile);
        manifest.gamma = meta.gamma;
        const int want = pattern[i % pattern.size()];
        const auto it = std::find_if(meta.shots.begin(), meta.shots.end(),
                                     [&](const auto& s) { return s.ev == want; });
        if (it == meta.shots.end())
            throw std::invalid_argument("sequence: frame " + std::to_string(i) + " (" +
                                        frame_dirs[i].string() + ") has no shot at EV " +
                                        std::to_string(want));
        hdrv::ManifestFrame f;
        f.index = static_cast<int>(i);
        f.ev = it->ev;
        f.time_s = it->time_s;
        f.file = fs::relative(frame_dirs[i] / it->file, base).string();
        manifest.frames.push_back(std::move(f));
    }
    hdrv::save_sequence_manifest(manifest, out_manifest);
    std::printf("sequence: %zu frames, pattern %s -> %s\n", manifest.frames.size(),
                pattern_text.c_str(), out_manifest.string().c_str());
    return kExitOk;
}

json alpha_json(const hdrv::GlobalWeights& w) {
    json a = json::array();
    for (double v : w.alpha) a.push_back(v);
    return a;
}

json diag_json(const hdrv::NeighborDiagnostics& d) {
    return json{{"photometric_loss_identity", d.photometric_loss_identity},
                {"photometric_loss_fitted", d.photometric_loss_fitted},
                {"mean_abs_displacement", d.mean_abs_displacement},
                {"mean_confidence", d.mean_confidence}};
}

void dump_flow(const hdrv::FlowField& flow, const fs::path& stem) {
    hdrv::Image u(flow.height, flow.width, 1, hdrv::Domain::LinearHdr);
    hdrv::Image v(flow.height, flow.width, 1, hdrv::Domain::LinearHdr);
    // displacement components are signed; store magnitude-split planes
    for (size_t i = 0; i < flow.u.size(); ++i) {
        u.data[i] = flow.u[i];
        v.data[i] = flow.v[i];
    }
    u.domain = hdrv::Domain::LinearHdr;
    // PFM holds arbitrary floats; bypass domain validation by writing directly
    hdrv::save_image(u, fs::path(stem.string() + "_u.pfm"));
    hdrv::save_image(v, fs::path(stem.string() + "_v.pfm"));
}

int cmd_reconstruct(const fs::path& manifest_path, const fs::path& out_dir,
                    const hdrv::ReconstructionConfig& cfg, const GlobalFlags& g,
                    const json& resolved_cfg) {
    const hdrv::SequenceManifest manifest = hdrv::load_sequence_manifest(manifest_path);
    const fs::path base = manifest_path.parent_path().empty() ? fs::path(".")
                                                              : manifest_path.parent_path();
    const hdrv::AlternatingSequence seq = hdrv::load_sequence(manifest, base);

    uint64_t hash = fnv1a_file(manifest_path);
    for (const auto& f : manifest.frames) hash = fnv1a_file(base / f.file, hash);

    fs::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<hdrv::FrameResult> results;
    try {
        results = hdrv::reconstruct_video(seq, cfg, g.workers);
    } catch (const hdrv::NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    const double total_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["config"] = resolved_cfg;
    report["flags"] = flags_json(g);
    report["input_hash"] = hex64(hash);
    report["frames"] = json::array();
    for (size_t i = 0; i < results.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04zu.pfm", i);
        hdrv::save_image(results[i].hdr, out_dir / name);
        json f;
        f["index"] = i;
        f["file"] = name;
        f["global_alpha_prev"] = alpha_json(results[i].global_alpha_prev);
        f["global_alpha_next"] = alpha_json(results[i].global_alpha_next);
        f["diagnostics"] = {{"prev", diag_json(results[i].diag_prev)},
                            {"next", diag_json(results[i].diag_next)}};
        report["frames"].push_back(std::move(f));

        if (results[i].intermediates) {
            char stem[48];
            std::snprintf(stem, sizeof stem, "frame_%04zu", i);
            const auto& fi = *results[i].intermediates;
            hdrv::save_image(fi.ref_masks, out_dir / (std::string(stem) + "_masks.pfm"));
            hdrv::save_image(fi.confidence_prev,
                             out_dir / (std::string(stem) + "_conf_prev.pfm"));
            hdrv::save_image(fi.confidence_next,
                             out_dir / (std::string(stem) + "_conf_next.pfm"));
            dump_flow(fi.displacement_prev, out_dir / (std::string(stem) + "_disp_prev"));
            dump_flow(fi.displacement_next, out_dir / (std::string(stem) + "_disp_next"));
        }
    }
    report["total_time_s"] = total_s;
    report["seconds_per_frame"] = total_s / static_cast<double>(results.size());
    write_text(out_dir / "report.json", report.dump(2));
    std::printf("reconstruct: %zu frames -> %s (%.2f s)\n", results.size(),
                out_dir.string().c_str(), total_s);
    return kExitOk;
}

int cmd_eval(const fs::path& estimates_dir, const fs::path& truth_dir, const fs::path& out_csv,
             const GlobalFlags& g) {
    const std::vector<fs::path> est = list_pfm_sorted(estimates_dir);
    const std::vector<fs::path> tru = list_pfm_sorted(truth_dir);
    if (est.size() != tru.size()) {
        std::string msg = "eval: frame count mismatch (" + std::to_string(est.size()) + " vs " +
                          std::to_string(tru.size()) + "); unmatched:";
        const size_t common = std::min(est.size(), tru.size());
        const auto& longer = est.size() > tru.size() ? est : tru;
        for (size_t i = common; i < longer.size(); ++i)
            msg += " " + longer[i].filename().string();
        throw std::invalid_argument(msg);
    }
    if (est.empty())
        throw std::invalid_argument("eval: no .pfm files in " + estimates_dir.string());

    uint64_t hash = 0xcbf29ce484222325ull;
    std::vector<hdrv::QualityScores> scores;
    std::vector<std::string> ids;
    for (size_t i = 0; i < est.size(); ++i) {
        const hdrv::Image e = hdrv::load_image(est[i], hdrv::Domain::LinearHdr);
        const hdrv::Image t = hdrv::load_image(tru[i], hdrv::Domain::LinearHdr);
        scores.push_back(hdrv::quality_scores(e, t));
        ids.push_back(est[i].stem().string());
        hash = fnv1a_file(est[i], hash);
        hash = fnv1a_file(tru[i], hash);
    }
    const hdrv::MetricReport report = hdrv::dataset_report(scores, ids);
    hdrv::write_report_csv(report, out_csv);
    json extra{{"flags", flags_json(g)}, {"input_hash", hex64(hash)}};
    write_text(fs::path(out_csv).replace_extension(".json"),
               hdrv::report_json_string(report, extra.dump()));
    std::printf("eval: %zu frame pairs -> %s\n", est.size(), out_csv.string().c_str());
    return kExitOk;
}

int cmd_stats(const fs::path& hdr_dir, const fs::path& out_csv, const GlobalFlags& g) {
    const std::vector<fs::path> files = list_pfm_sorted(hdr_dir);
    if (files.empty())
        throw std::invalid_argument("stats: no .pfm files in " + hdr_dir.string());
    uint64_t hash = 0xcbf29ce484222325ull;
    std::vector<hdrv::DiversityScores> scores;
    std::vector<std::string> ids;
    for (const auto& f : files) {
        scores.push_back(hdrv::diversity_metrics(hdrv::load_image(f, hdrv::Domain::LinearHdr)));
        ids.push_back(f.stem().string());
        hash = fnv1a_file(f, hash);
        if (scores.back().degenerate)
            std::fprintf(stderr, "stats: %s is all-zero luminance; DR pinned to 0\n",
                         f.filename().string().c_str());
    }
    const hdrv::MetricReport report = hdrv::dataset_report(scores, ids);
    hdrv::write_report_csv(report, out_csv);
    json extra{{"flags", flags_json(g)}, {"input_hash", hex64(hash)}};
    write_text(fs::path(out_csv).replace_extension(".json"),
               hdrv::report_json_string(report, extra.dump()));
    std::printf("stats: %zu frames -> %s\n", files.size(), out_csv.string().c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"HDR video reconstruction from alternating-exposure LDR sequences"};
    app.require_subcommand(1);

    GlobalFlags g;
    app.add_option("--config", g.config_path, "JSON config file; flags override its values");
    auto* opt_workers = app.add_option("--workers", g.workers, "Frame-level worker threads");
    app.add_option("--seed", g.seed, "Seed for synthetic generators");
    auto* opt_dump = app.add_flag("--dump-intermediates", g.dump_intermediates,
                                  "Dump masks, displacement, and confidence fields as .pfm");

    auto* merge = app.add_subcommand("merge", "Merge a multi-exposure stack into an HDR frame");
    std::string stack_dir, merge_out;
    bool dry_run = false;
    merge->add_option("stack_dir", stack_dir, "Directory with stack.json and shots")->required();
    merge->add_option("out", merge_out, "Output .pfm path")->required();
    merge->add_flag("--dry-run", dry_run, "Validate inputs without writing");

    auto* sequence = app.add_subcommand("sequence", "Build an alternating-exposure manifest");
    std::string scene_dir, pattern_text, manifest_out;
    sequence->add_option("scene_dir", scene_dir, "Directory of frame stack directories")
        ->required();
    sequence->add_option("pattern", pattern_text, "EV cycle, e.g. \"-3,0\" or \"-2,+1\"")
        ->required();
    sequence->add_option("out", manifest_out, "Output manifest JSON path")->required();

    auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct HDR frames from a manifest");
    std::string rec_manifest, rec_out;
    hdrv::ReconstructionConfig rcfg;
    bool no_align = false;
    reconstruct->add_option("manifest", rec_manifest, "Sequence manifest JSON")->required();
    reconstruct->add_option("out_dir", rec_out, "Output directory")->required();
    auto* opt_levels = reconstruct->add_option("--levels", rcfg.local.levels,
                                               "Local alignment pyramid levels");
    auto* opt_radius = reconstruct->add_option("--radius", rcfg.local.radius,
                                               "Block match search radius (pixels)");
    auto* opt_block = reconstruct->add_option("--block", rcfg.local.block, "Block size (pixels)");
    auto* opt_kernel = reconstruct->add_option("--kernel", rcfg.local.kernel_size,
                                               "Separable kernel length (odd)");
    auto* opt_glevels = reconstruct->add_option("--g-levels", rcfg.global.levels,
                                                "Global alignment pyramid levels");
    auto* opt_giters = reconstruct->add_option("--g-iters", rcfg.global.iters_per_level,
                                               "Global descent iterations per level");
    auto* opt_gstep = reconstruct->add_option("--g-step", rcfg.global.step,
                                              "Initial descent step size");
    auto* opt_mu = reconstruct->add_option("--mu", rcfg.mu, "Mu-law compression parameter");
    reconstruct->add_flag("--no-align", no_align,
                          "Skip both alignment stages (baseline fusion)");

    auto* eval = app.add_subcommand("eval", "Score estimated HDR frames against ground truth");
    std::string est_dir, truth_dir, eval_csv;
    eval->add_option("estimates_dir", est_dir, "Directory of estimate .pfm files")->required();
    eval->add_option("truth_dir", truth_dir, "Directory of ground-truth .pfm files")->required();
    eval->add_option("out", eval_csv, "Output CSV path (JSON written alongside)")->required();

    auto* stats = app.add_subcommand("stats", "Dataset diversity statistics for HDR frames");
    std::string stats_dir, stats_csv;
    stats->add_option("hdr_dir", stats_dir, "Directory of HDR .pfm files")->required();
    stats->add_option("out", stats_csv, "Output CSV path (JSON written alongside)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!g.config_path.empty()) {
            std::ifstream in(g.config_path);
            if (!in)
                throw std::invalid_argument(g.config_path + ": cannot open config");
            g.config = json::parse(in);
        }
        g.workers = resolved(opt_workers, g.config, "workers", g.workers);
        g.dump_intermediates = resolved(opt_dump, g.config, "dump_intermediates",
                                        g.dump_intermediates);

        if (merge->parsed())
            return cmd_merge(stack_dir, merge_out, dry_run);
        if (sequence->parsed())
            return cmd_sequence(scene_dir, pattern_text, manifest_out);
        if (reconstruct->parsed()) {
            rcfg.local.levels = resolved(opt_levels, g.config, "levels", rcfg.local.levels);
            rcfg.local.radius = resolved(opt_radius, g.config, "radius", rcfg.local.radius);
            rcfg.local.block = resolved(opt_block, g.config, "block", rcfg.local.block);
            rcfg.local.kernel_size = resolved(opt_kernel, g.config, "kernel",
                                              rcfg.local.kernel_size);
            rcfg.global.levels = resolved(opt_glevels, g.config, "g_levels", rcfg.global.levels);
            rcfg.global.iters_per_level = resolved(opt_giters, g.config, "g_iters",
                                                   rcfg.global.iters_per_level);
            rcfg.global.step = resolved(opt_gstep, g.config, "g_step", rcfg.global.step);
            rcfg.mu = resolved(opt_mu, g.config, "mu", rcfg.mu);
            rcfg.align = !no_align && !g.config.value("no_align", false);
            if (no_align) rcfg.align = false;
            rcfg.dump_intermediates = g.dump_intermediates;
            const json resolved_cfg{{"levels", rcfg.local.levels},
                                    {"radius", rcfg.local.radius},
                                    {"block", rcfg.local.block},
                                    {"kernel", rcfg.local.kernel_size},
                                    {"g_levels", rcfg.global.levels},
                                    {"g_iters", rcfg.global.iters_per_level},
                                    {"g_step", rcfg.global.step},
                                    {"mu", rcfg.mu},
                                    {"align", rcfg.align}};
            return cmd_reconstruct(rec_manifest, rec_out, rcfg, g, resolved_cfg);
        }
        if (eval->parsed())
            return cmd_eval(est_dir, truth_dir, eval_csv, g);
        if (stats->parsed())
            return cmd_stats(stats_dir, stats_csv, g);
    } catch (const hdrv::NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
    return kExitOk;
}
