#pragma once

#include <optional>

#include "hdrv/global_align.hpp"
#include "hdrv/local_align.hpp"
#include "hdrv/radiometry.hpp"

namespace hdrv {

struct ReconstructionConfig {
    std::vector<int> pattern{-3, 0};
    double gamma = kDefaultGamma;
    double mu = kDefaultMu;
    double reference_time = 1.0;
    GlobalAlignOptions global;
    LocalAlignOptions local;
    bool align = true; // false = fuse the raw neighbors (baseline mode)
    bool dump_intermediates = false;
};

/// Per-neighbor alignment diagnostics for the frame report.
struct NeighborDiagnostics {
    double photometric_loss_identity = 0.0;
    double photometric_loss_fitted = 0.0;
    double mean_abs_displacement = 0.0;
    double mean_confidence = 1.0;
};

/// Debug fields attached when ReconstructionConfig::dump_intermediates is set.
struct FrameIntermediates {
    Image ref_masks; // 3-channel contrast/wellness/saturation of the reference
    FlowField displacement_prev, displacement_next;
    Image confidence_prev, confidence_next;
};

struct FrameResult {
    Image hdr;
    GlobalWeights global_alpha_prev;
    GlobalWeights global_alpha_next;
    NeighborDiagnostics diag_prev;
    NeighborDiagnostics diag_next;
    std::optional<FrameIntermediates> intermediates;
};

/// Linear-domain weighted fusion of the reference and two aligned
/// neighbors. Weights are wellness of each source's display rendering
/// times its alignment confidence; the reference gets a fixed 2x prior
/// and confidence 1. All-zero-weight pixels fall back to the reference.
Image fuse_aligned(const InputFrame& ref, const AlignedFrame& aligned_prev,
                   const ExposureSpec& prev_spec, const AlignedFrame& aligned_next,
                   const ExposureSpec& next_spec);

/// Two-stage reconstruction of the center frame: exposure-normalize, fit
/// and apply the global basis flow per neighbor, locally align with the
/// kernel pyramid, then fuse.
FrameResult reconstruct_frame(const InputFrame& prev, const InputFrame& cur,
                              const InputFrame& next, const ReconstructionConfig& cfg);

/// Reconstruct every frame of an alternating sequence (boundary frames use
/// their single neighbor twice). Frames are independent; `workers` sets the
/// thread pool size and never affects the numeric output.
std::vector<FrameResult> reconstruct_video(const AlternatingSequence& seq,
                                           const ReconstructionConfig& cfg, int workers = 1);

} // namespace hdrv
