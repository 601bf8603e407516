#include "hdrv/reconstruct.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "hdrv/errors.hpp"
#include "hdrv/masks.hpp"

namespace hdrv {

namespace {

// Unquantized display rendering of an aligned linear image, for wellness.
Image display_rendering(const Image& linear, const ExposureSpec& spec) {
    Image out(linear.height, linear.width, linear.channels, Domain::LdrDisplay);
    const double inv_g = 1.0 / spec.gamma;
    for (size_t i = 0; i < linear.data.size(); ++i) {
        const double v = std::pow(std::max(0.0, static_cast<double>(linear.data[i])) * spec.time_s,
                                  inv_g);
        out.data[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

constexpr double kReferencePrior = 2.0;

} // namespace

Image fuse_aligned(const InputFrame& ref, const AlignedFrame& aligned_prev,
                   const ExposureSpec& prev_spec, const AlignedFrame& aligned_next,
                   const ExposureSpec& next_spec) {
    if (prev_spec.time_s <= 0.0 || next_spec.time_s <= 0.0 || ref.spec.time_s <= 0.0)
        throw std::invalid_argument("fuse_aligned: missing or invalid exposure metadata");
    if (!ref.linear.same_shape(aligned_prev.image) || !ref.linear.same_shape(aligned_next.image))
        throw std::invalid_argument("fuse_aligned: sources are not co-registered");

    const Image w_ref = wellness_map(ref.ldr);
    const Image w_prev = wellness_map(display_rendering(aligned_prev.image, prev_spec));
    const Image w_next = wellness_map(display_rendering(aligned_next.image, next_spec));

    Image out(ref.linear.height, ref.linear.width, ref.linear.channels, Domain::LinearHdr);
    const size_t n = out.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        const double wr = kReferencePrior * w_ref.data[i];
        const double wp = static_cast<double>(w_prev.data[i]) * aligned_prev.confidence.data[i];
        const double wn = static_cast<double>(w_next.data[i]) * aligned_next.confidence.data[i];
        const double wsum = wr + wp + wn;
        for (int c = 0; c < out.channels; ++c) {
            const size_t j = static_cast<size_t>(c) * n + i;
            if (wsum <= 0.0) {
                out.data[j] = ref.linear.data[j];
            } else {
                const double e = wr * ref.linear.data[j] + wp * aligned_prev.image.data[j] +
                                 wn * aligned_next.image.data[j];
                out.data[j] = static_cast<float>(std::max(0.0, e / wsum));
            }
        }
    }
    return out;
}

namespace {

struct AlignedNeighbor {
    AlignedFrame frame;
    GlobalWeights alpha;
    NeighborDiagnostics diag;
};

Image saturation_valid_mask(const Image& ref_ldr, const Image& nbr_ldr) {
    const Image wr = wellness_map(ref_ldr);
    const Image wn = wellness_map(nbr_ldr);
    Image valid(wr.height, wr.width, 1, Domain::LinearHdr);
    for (size_t i = 0; i < valid.data.size(); ++i)
        valid.data[i] =
            (std::min(wr.data[i], wn.data[i]) >= kSaturationWellnessMin) ? 1.0f : 0.0f;
    return valid;
}

AlignedNeighbor align_neighbor(const InputFrame& cur, const InputFrame& nbr,
                               const ReconstructionConfig& cfg) {
    AlignedNeighbor out;
    if (!cfg.align) {
        out.frame.image = nbr.linear;
        out.frame.displacement = FlowField(cur.ldr.height, cur.ldr.width);
        out.frame.confidence = Image(cur.ldr.height, cur.ldr.width, 1, Domain::LinearHdr, 1.0f);
        return out;
    }

    const Image valid = saturation_valid_mask(cur.ldr, nbr.ldr);

    // stage 1: global basis flow
    out.alpha = fit_global_weights(cur.linear, nbr.linear, cfg.global, &valid);
    const OffsetBases bases = make_offset_bases(cur.ldr.height, cur.ldr.width);
    out.diag.photometric_loss_identity =
        photometric_loss(cur.linear, nbr.linear, GlobalWeights{}, bases, &valid);
    out.diag.photometric_loss_fitted =
        photometric_loss(cur.linear, nbr.linear, out.alpha, bases, &valid);
    const FlowField gflow = compose_global_flow(out.alpha, bases);
    const Image warped_linear = warp_bilinear(nbr.linear, gflow);
    const Image warped_ldr = warp_bilinear(nbr.ldr, gflow);

    // stage 2: pyramidal kernel alignment on the globally warped neighbor
    out.frame = align_local_pyramid(cur.linear, warped_linear, cfg.local, &cur.ldr, &warped_ldr);

    double disp = 0.0, conf = 0.0;
    const size_t n = out.frame.displacement.u.size();
    for (size_t i = 0; i < n; ++i) {
        disp += std::hypot(out.frame.displacement.u[i], out.frame.displacement.v[i]);
        conf += out.frame.confidence.data[i];
    }
    out.diag.mean_abs_displacement = disp / static_cast<double>(n);
    out.diag.mean_confidence = conf / static_cast<double>(n);
    return out;
}

} // namespace

FrameResult reconstruct_frame(const InputFrame& prev, const InputFrame& cur,
                              const InputFrame& next, const ReconstructionConfig& cfg) {
    if (!prev.ldr.same_shape(cur.ldr) || !next.ldr.same_shape(cur.ldr))
        throw std::invalid_argument("reconstruct_frame: frames differ in shape");
    if (prev.spec.ev == cur.spec.ev || next.spec.ev == cur.spec.ev)
        throw std::invalid_argument(
            "reconstruct_frame: neighbors must carry the complementary exposure");

    FrameResult result;
    try {
        AlignedNeighbor ap = align_neighbor(cur, prev, cfg);
        AlignedNeighbor an = align_neighbor(cur, next, cfg);
        result.global_alpha_prev = ap.alpha;
        result.global_alpha_next = an.alpha;
        result.diag_prev = ap.diag;
        result.diag_next = an.diag;
        result.hdr = fuse_aligned(cur, ap.frame, prev.spec, an.frame, next.spec);
        if (cfg.dump_intermediates) {
            FrameIntermediates fi;
            fi.ref_masks = adaptive_mask(cur.ldr).combined;
            fi.displacement_prev = std::move(ap.frame.displacement);
            fi.displacement_next = std::move(an.frame.displacement);
            fi.confidence_prev = std::move(ap.frame.confidence);
            fi.confidence_next = std::move(an.frame.confidence);
            result.intermediates = std::move(fi);
        }
    } catch (const NumericError& e) {
        throw NumericError(std::string("reconstruct_frame: ") + e.what());
    }
    return result;
}

std::vector<FrameResult> reconstruct_video(const AlternatingSequence& seq,
                                           const ReconstructionConfig& cfg, int workers) {
    const size_t n = seq.frames.size();
    if (n < 3)
        throw std::invalid_argument("reconstruct_video: sequence must have at least 3 frames");
    if (workers < 1)
        throw std::invalid_argument("reconstruct_video: workers must be >= 1");

    std::vector<InputFrame> inputs;
    inputs.reserve(n);
    for (const auto& [img, spec] : seq.frames) inputs.push_back(InputFrame::make(img, spec));

    std::vector<FrameResult> results(n);
    std::exception_ptr failure;
    std::atomic<size_t> next_idx{0};
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (size_t i = next_idx.fetch_add(1); i < n; i = next_idx.fetch_add(1)) {
            if (failed.load()) return;
            try {
                const size_t p = i == 0 ? 1 : i - 1;
                const size_t q = i + 1 == n ? n - 2 : i + 1;
                results[i] = reconstruct_frame(inputs[p], inputs[i], inputs[q], cfg);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };

    const int nthreads = static_cast<int>(std::min<size_t>(workers, n));
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

} // namespace hdrv
