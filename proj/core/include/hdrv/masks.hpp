#pragma once

#include "hdrv/image.hpp"

namespace hdrv {

/// Per-frame exposure-quality maps plus their 3-channel stacking
/// (channel order: contrast, wellness, saturation).
struct MaskSet {
    Image contrast;
    Image wellness;
    Image saturation;
    Image combined;
};

inline constexpr double kWellnessSigma = 0.2;

/// |Laplacian| of luminance, 3x3 stencil [[0,1,0],[1,-4,1],[0,1,0]], clamp-to-edge.
Image contrast_map(const Image& img);

/// Well-exposedness: product over channels of exp(-(v-0.5)^2 / (2 sigma^2)).
Image wellness_map(const Image& img, double sigma = kWellnessSigma);

/// Per-pixel population standard deviation across R,G,B.
Image saturation_map(const Image& img);

/// All three maps plus the stacked 3-channel mask.
MaskSet adaptive_mask(const Image& img);

} // namespace hdrv
