// Acceptance suite: runs every shipped contract end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hdrv/global_align.hpp"
#include "hdrv/local_align.hpp"
#include "hdrv/metrics.hpp"
#include "hdrv/radiometry.hpp"
#include "hdrv/reconstruct.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace hdrv;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string&)> run;
};

bool report(bool ok, std::string& detail, const std::string& msg) {
    detail = msg;
    return ok;
}

// ---- 1: mu-law exactness ---------------------------------------------------
bool c1_mu_law(std::string& detail) {
    bool ok = mu_tonemap_value(0.0) == 0.0 && std::abs(mu_tonemap_value(1.0) - 1.0) < 1e-12;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> xs(10000);
    for (double& x : xs) x = uni(rng);
    std::sort(xs.begin(), xs.end());
    for (size_t i = 1; i < xs.size() && ok; ++i)
        if (xs[i] > xs[i - 1] && !(mu_tonemap_value(xs[i]) > mu_tonemap_value(xs[i - 1])))
            ok = false;
    return report(ok, detail, "T(0)=0, T(1)=1, strictly monotone over 10000 samples");
}

// ---- 2: Eq.-1 inverse pair -------------------------------------------------
bool c2_inverse_pair(std::string& detail) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<float> uni(0.0f, 0.9999f);
    Image img(100, 100, 1, Domain::LdrDisplay);
    for (float& v : img.data) v = uni(rng);
    const ExposureSpec spec = ExposureSpec::from_ev(-3);
    const Image back = linear_to_ldr(ldr_to_linear(img, spec), spec, 16);
    float max_err = 0.0f;
    for (size_t i = 0; i < img.data.size(); ++i)
        max_err = std::max(max_err, std::abs(back.data[i] - img.data[i]));
    const float half_quantum = 0.5f / 65535.0f;
    char buf[128];
    std::snprintf(buf, sizeof buf, "max |round-trip error| = %.3g (limit %.3g)", max_err,
                  half_quantum);
    return report(max_err <= half_quantum, detail, buf);
}

// ---- 3: ASConv oracle equivalence -------------------------------------------
bool c3_asconv_oracle(std::string& detail) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> uni(0.0f, 1.0f);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Image img = testsup::make_texture(64, 64, rng(), 1);
        SeparableKernelField kf(64, 64, 31);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                float sv = 0.0f, sh = 0.0f;
                for (int t = 0; t < 31; ++t) {
                    kf.kv_at(x, y)[t] = uni(rng);
                    kf.kh_at(x, y)[t] = uni(rng);
                    sv += kf.kv_at(x, y)[t];
                    sh += kf.kh_at(x, y)[t];
                }
                for (int t = 0; t < 31; ++t) {
                    kf.kv_at(x, y)[t] /= sv;
                    kf.kh_at(x, y)[t] /= sh;
                }
            }
        const Image fast = asconv(img, kf);
        const Image slow = testsup::asconv_bruteforce(img, kf);
        for (size_t i = 0; i < fast.data.size(); ++i)
            worst = std::max(worst, std::abs(static_cast<double>(fast.data[i]) - slow.data[i]));
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "max |asconv - bruteforce| over 20 instances = %.3g", worst);
    return report(worst < 1e-5, detail, buf);
}

// ---- 4: global-alignment gradient check -------------------------------------
bool c4_gradient_check(std::string& detail) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uni(-0.8, 0.8);
    const double h = 1e-3;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Image nbr = testsup::make_texture(64, 64, rng(), 1, 0.1f, 0.9f);
        const OffsetBases ob = make_offset_bases(64, 64);
        GlobalWeights truth, alpha;
        for (int k = 0; k < 8; ++k) {
            truth.alpha[k] = uni(rng);
            alpha.alpha[k] = uni(rng);
        }
        const Image ref = warp_catmull_rom(nbr, compose_global_flow(truth, ob));
        Image valid(64, 64, 1, Domain::LinearHdr, 1.0f);

        const LossGrad lg = photometric_loss_and_grad(ref, nbr, alpha, ob, &valid);
        double num2 = 0.0, den2 = 0.0;
        for (int k = 0; k < 8; ++k) {
            GlobalWeights up = alpha, dn = alpha;
            up.alpha[k] += h;
            dn.alpha[k] -= h;
            const double fd = (photometric_loss(ref, nbr, up, ob, &valid) -
                               photometric_loss(ref, nbr, dn, ob, &valid)) /
                              (2.0 * h);
            num2 += (lg.grad[k] - fd) * (lg.grad[k] - fd);
            den2 += fd * fd;
        }
        worst = std::max(worst, std::sqrt(num2) / std::max(1e-12, std::sqrt(den2)));
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "worst relative gradient error over 20 instances = %.3g",
                  worst);
    return report(worst < 1e-3, detail, buf);
}

// ---- 5: global recovery ------------------------------------------------------
bool c5_global_recovery(std::string& detail) {
    const int n = 256;
    double epe_t = 0.0, epe_r = 0.0, epe_p = 0.0;
    {
        const Image nbr = testsup::make_texture(n, n, 501);
        const OffsetBases ob = make_offset_bases(n, n);
        GlobalWeights truth;
        truth.alpha[0] = 3.0;
        truth.alpha[1] = -2.0;
        const Image ref = warp_catmull_rom(nbr, compose_global_flow(truth, ob));
        Image valid(n, n, 1, Domain::LinearHdr, 1.0f);
        const GlobalWeights alpha = fit_global_weights(ref, nbr, {}, &valid);
        epe_t = testsup::mean_epe(compose_global_flow(alpha, ob), compose_global_flow(truth, ob),
                                  0);
    }
    {
        const Image nbr = testsup::make_texture(n, n, 502);
        const OffsetBases ob = make_offset_bases(n, n);
        const double theta = 2.0 * 3.141592653589793 / 180.0;
        const double s = (n - 1) / 2.0;
        GlobalWeights truth;
        truth.alpha[2] = std::sin(theta) * s * std::sqrt(2.0);
        truth.alpha[4] = (std::cos(theta) - 1.0) * s;
        truth.alpha[5] = (std::cos(theta) - 1.0) * s;
        const Image ref = warp_catmull_rom(nbr, compose_global_flow(truth, ob));
        Image valid(n, n, 1, Domain::LinearHdr, 1.0f);
        const GlobalWeights alpha = fit_global_weights(ref, nbr, {}, &valid);
        epe_r = testsup::mean_epe(compose_global_flow(alpha, ob), compose_global_flow(truth, ob),
                                  0);
    }
    {
        const Image nbr = testsup::make_texture(n, n, 503);
        const OffsetBases ob = make_offset_bases(n, n);
        GlobalWeights truth;
        truth.alpha[6] = 2.5;
        truth.alpha[7] = -1.5;
        const Image ref = warp_catmull_rom(nbr, compose_global_flow(truth, ob));
        Image valid(n, n, 1, Domain::LinearHdr, 1.0f);
        const GlobalWeights alpha = fit_global_weights(ref, nbr, {}, &valid);
        epe_p = testsup::mean_epe(compose_global_flow(alpha, ob), compose_global_flow(truth, ob),
                                  0);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "mean EPE: translation %.3f px, rotation %.3f px, perspective %.3f px "
                  "(limit 0.5)",
                  epe_t, epe_r, epe_p);
    return report(epe_t < 0.5 && epe_r < 0.5 && epe_p < 0.5, detail, buf);
}

// ---- 6: coarse-to-fine local recovery ----------------------------------------
bool c6_local_recovery(std::string& detail) {
    const Image ref = testsup::make_texture(256, 256, 601);
    const Image nbr = testsup::shift_image(ref, 24, 0);
    const AlignedFrame a = align_local_pyramid(ref, nbr);
    const double epe = testsup::mean_epe_const(a.displacement, 24.0f, 0.0f, 32);
    char buf[128];
    std::snprintf(buf, sizeof buf, "24 px shift: interior mean EPE = %.3f px (limit 1.0)", epe);
    return report(epe < 1.0, detail, buf);
}

// ---- 7: merge fidelity ---------------------------------------------------------
bool c7_merge_fidelity(std::string& detail) {
    Image hdr(64, 256, 3, Domain::LinearHdr);
    for (int y = 0; y < hdr.height; ++y)
        for (int x = 0; x < hdr.width; ++x)
            for (int c = 0; c < 3; ++c)
                hdr.at(x, y, c) = 1e-4f * std::pow(10.0f, 5.0f * x / 255.0f);
    const MultiExposureStack stack =
        simulate_exposure_stack(hdr, {-3, -2, -1, 0, 1, 2, 3}, 16, 0.0);
    const Image merged = merge_stack_to_hdr(stack);
    double worst = 0.0;
    size_t checked = 0;
    for (size_t i = 0; i < hdr.data.size(); ++i) {
        int informative = 0;
        for (const auto& [spec, img] : stack.shots)
            if (img.data[i] > 0.0f && img.data[i] < 1.0f) ++informative;
        if (informative < 2) continue;
        worst = std::max(worst,
                         std::abs(static_cast<double>(merged.data[i]) - hdr.data[i]) /
                             hdr.data[i]);
        ++checked;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "worst relative error %.4f%% over %zu pixels unclipped in >=2 shots",
                  worst * 100.0, checked);
    return report(checked > 0 && worst < 0.01, detail, buf);
}

// ---- 8: end-to-end alignment benefit -------------------------------------------
bool c8_alignment_benefit(std::string& detail) {
    struct Case {
        const char* name;
        testsup::SyntheticScene scene;
        double required_margin;
    };
    std::vector<Case> cases;
    cases.push_back({"global", testsup::make_global_motion_scene(801, 8, 160, 224, 5, 3), 3.0});
    cases.push_back({"local", testsup::make_local_motion_scene(802, 8, 160, 224, 6, 2), 0.0});
    cases.push_back({"full", testsup::make_full_motion_scene(803, 8, 160, 224), 0.0});

    std::string msg;
    bool ok = true;
    for (const Case& c : cases) {
        ReconstructionConfig cfg;
        const std::vector<FrameResult> aligned = reconstruct_video(c.scene.seq, cfg, 4);
        cfg.align = false;
        const std::vector<FrameResult> baseline = reconstruct_video(c.scene.seq, cfg, 4);
        double psnr_a = 0.0, psnr_b = 0.0;
        for (size_t i = 0; i < aligned.size(); ++i) {
            psnr_a += psnr_mu(aligned[i].hdr, c.scene.truth[i]);
            psnr_b += psnr_mu(baseline[i].hdr, c.scene.truth[i]);
        }
        psnr_a /= static_cast<double>(aligned.size());
        psnr_b /= static_cast<double>(baseline.size());
        const double margin = psnr_a - psnr_b;
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s%s +%.2f dB (%.2f vs %.2f)",
                      msg.empty() ? "" : "; ", c.name, margin, psnr_a, psnr_b);
        msg += buf;
        if (margin <= c.required_margin) ok = false;
    }
    return report(ok, detail, msg);
}

// ---- 9: metric sanity suite -------------------------------------------------------
bool c9_metric_sanity(std::string& detail) {
    bool ok = true;
    const Image hdr = testsup::make_radiance_field(64, 64, 901);
    ok &= psnr_mu(hdr, hdr) == kPsnrCap;
    ok &= std::abs(ssim_mu(hdr, hdr) - 1.0) < 1e-12;
    ok &= pu_psnr(hdr, hdr) == kPsnrCap;
    ok &= std::abs(pu_ssim(hdr, hdr) - 1.0) < 1e-12;

    Image gray(32, 32, 3, Domain::LinearHdr);
    std::mt19937_64 rng(902);
    std::uniform_real_distribution<float> uni(0.0f, 2.0f);
    for (size_t i = 0; i < gray.pixel_count(); ++i) {
        const float v = uni(rng);
        for (int c = 0; c < 3; ++c) gray.plane(c)[i] = v;
    }
    ok &= diversity_metrics(gray).cf == 0.0;

    const DiversityScores flat = diversity_metrics(Image(32, 32, 3, Domain::LinearHdr, 0.4f));
    ok &= flat.stdl == 0.0 && flat.si == 0.0 && flat.dr == 0.0;

    Image hl(20, 50, 1, Domain::LinearHdr, 0.5f);
    for (int i = 0; i < 100; ++i) hl.data[i] = 1.0f;
    ok &= diversity_metrics(hl).fhlp == 0.1;
    return report(ok, detail,
                  "identity caps, grayscale CF=0, constant stdL=SI=DR=0, FHLP counting = 0.10");
}

// ---- 10: CLI determinism ---------------------------------------------------------
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

bool c10_cli_determinism(std::string& detail) {
    const fs::path dir = fs::temp_directory_path() / "hdrv_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const testsup::SyntheticScene scene = testsup::make_global_motion_scene(1001, 4, 64, 96, 2, 1);
    for (size_t i = 0; i < scene.truth.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03zu", i);
        const fs::path fdir = dir / name;
        fs::create_directories(fdir);
        std::string shots_json;
        const MultiExposureStack stack = simulate_exposure_stack(scene.truth[i], {-3, 0}, 16, 0.0);
        for (const auto& [spec, img] : stack.shots) {
            char shot[32];
            std::snprintf(shot, sizeof shot, "ev%+d.png", spec.ev);
            save_image(img, fdir / shot, 16);
            char entry[128];
            std::snprintf(entry, sizeof entry,
                          "%s{\"ev\": %d, \"time_s\": %.9g, \"file\": \"%s\"}",
                          shots_json.empty() ? "" : ", ", spec.ev, spec.time_s, shot);
            shots_json += entry;
        }
        std::ofstream(fdir / "stack.json")
            << "{\"frame\": " << i << ", \"gamma\": 2.2, \"shots\": [" << shots_json << "]}";
    }

    auto run = [&](const std::string& args) {
        const std::string cmd = std::string(HDRV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    const fs::path manifest = dir / "seq.json";
    if (run("sequence " + dir.string() + " -3,0 " + manifest.string()) != 0)
        return report(false, detail, "sequence command failed");

    const std::string flags = " --g-iters 20 --radius 8 --seed 7 ";
    std::vector<std::string> outs = {"w1", "w4", "w8", "w1_again"};
    std::vector<std::string> workers = {"1", "4", "8", "1"};
    for (size_t i = 0; i < outs.size(); ++i)
        if (run("reconstruct --workers " + workers[i] + flags + manifest.string() + " " +
                (dir / outs[i]).string()) != 0)
            return report(false, detail, "reconstruct failed for workers=" + workers[i]);

    bool ok = true;
    for (int f = 0; f < 4; ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.pfm", f);
        const uint64_t h0 = file_hash(dir / outs[0] / name);
        for (size_t i = 1; i < outs.size(); ++i)
            if (file_hash(dir / outs[i] / name) != h0) ok = false;
    }
    return report(ok, detail, "outputs bit-identical across --workers 1/4/8 and repeated runs");
}

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "mu-law exactness", c1_mu_law},
        {2, "exposure linearization inverse pair", c2_inverse_pair},
        {3, "asconv brute-force equivalence", c3_asconv_oracle},
        {4, "global-alignment gradient check", c4_gradient_check},
        {5, "global motion recovery", c5_global_recovery},
        {6, "coarse-to-fine local recovery", c6_local_recovery},
        {7, "multi-exposure merge fidelity", c7_merge_fidelity},
        {8, "end-to-end alignment benefit", c8_alignment_benefit},
        {9, "metric sanity suite", c9_metric_sanity},
        {10, "CLI determinism", c10_cli_determinism},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s — criterion %2d: %s [%.1f s] %s\n", ok ? "PASS" : "FAIL", c.id,
                    c.name.c_str(), secs, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
