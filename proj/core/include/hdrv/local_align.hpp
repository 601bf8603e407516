#pragma once

#include "hdrv/global_align.hpp"
#include "hdrv/image.hpp"
#include "hdrv/masks.hpp"

namespace hdrv {

inline constexpr int kDefaultKernelSize = 31;

/// Per-pixel separable kernel pair: a vertical and a horizontal 1-D kernel
/// of length K. Tap t of kh weighs img(x + t - K/2, y); kv likewise in y.
/// Layout: taps are contiguous per pixel, kv/kh[(y*width + x)*K + t].
struct SeparableKernelField {
    int height = 0;
    int width = 0;
    int K = kDefaultKernelSize;
    std::vector<float> kv, kh;

    SeparableKernelField() = default;
    SeparableKernelField(int h, int w, int k)
        : height(h), width(w), K(k), kv(static_cast<size_t>(h) * w * k, 0.0f),
          kh(static_cast<size_t>(h) * w * k, 0.0f) {}

    float* kv_at(int x, int y) { return kv.data() + (static_cast<size_t>(y) * width + x) * K; }
    float* kh_at(int x, int y) { return kh.data() + (static_cast<size_t>(y) * width + x) * K; }
    const float* kv_at(int x, int y) const {
        return kv.data() + (static_cast<size_t>(y) * width + x) * K;
    }
    const float* kh_at(int x, int y) const {
        return kh.data() + (static_cast<size_t>(y) * width + x) * K;
    }
};

/// A locally aligned neighbor: the transformed image, the committed total
/// displacement (diagnostics), and a per-pixel match-quality map in [0,1].
struct AlignedFrame {
    Image image;
    FlowField displacement;
    Image confidence;
};

struct BlockMatchResult {
    SeparableKernelField kernels;
    FlowField displacement;
    Image confidence;
};

struct LocalAlignOptions {
    int levels = 3;
    int radius = 15;
    int block = 8;
    int kernel_size = kDefaultKernelSize;
};

/// Adaptive separable convolution:
/// out(p) = sum_{i,j} kv_p[i] * kh_p[j] * img(p + (j,i)), clamp-to-edge.
Image asconv(const Image& img, const SeparableKernelField& kernels);

/// Exhaustive integer block matching minimizing wellness-weighted SAD on
/// luminance. Emits delta kernels at each block's winning displacement
/// (triangle-softened when the displacement is nonzero), the displacement
/// field, and a best/second-best confidence map. Blocks whose weights all
/// vanish fall back to zero displacement with zero confidence.
BlockMatchResult estimate_kernels_block_match(const Image& ref, const Image& nbr,
                                              const MaskSet& masks_ref,
                                              const MaskSet& masks_nbr, int radius = 15,
                                              int block = 8,
                                              int kernel_size = kDefaultKernelSize);

/// Coarse-to-fine local alignment: block matching at the coarsest pyramid
/// level, then per level upsample the committed displacement, pre-warp the
/// neighbor, and estimate a reduced-radius residual; the finest-level
/// kernel field produces the aligned image. ref_ldr/nbr_ldr, when given,
/// are the display-domain frames the exposure masks are computed from
/// (defaults to the inputs clamped to [0,1]).
AlignedFrame align_local_pyramid(const Image& ref, const Image& nbr,
                                 const LocalAlignOptions& opts = {},
                                 const Image* ref_ldr = nullptr,
                                 const Image* nbr_ldr = nullptr);

} // namespace hdrv
