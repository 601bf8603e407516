#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hdrv/image.hpp"

namespace hdrv {

inline constexpr double kDefaultGamma = 2.2;
inline constexpr double kDefaultMu = 5000.0;

/// One shot's exposure: EV stops relative to the reference exposure,
/// the implied exposure time (reference 1 s at EV 0), and the display gamma.
struct ExposureSpec {
    int ev = 0;
    double time_s = 1.0;
    double gamma = kDefaultGamma;

    static ExposureSpec from_ev(int ev, double reference_time = 1.0,
                                double gamma = kDefaultGamma);
};

/// Co-registered LDR shots of one static frame, sorted by strictly
/// increasing EV.
struct MultiExposureStack {
    int frame_id = 0;
    std::vector<std::pair<ExposureSpec, Image>> shots;
};

/// LDR frames cycling through a fixed EV pattern.
struct AlternatingSequence {
    std::vector<std::pair<Image, ExposureSpec>> frames;
    std::vector<int> pattern;
};

/// One pipeline input: the display-referred frame plus its linearization.
struct InputFrame {
    Image ldr;
    Image linear;
    ExposureSpec spec;

    static InputFrame make(Image ldr, const ExposureSpec& spec);
};

/// Linearize a display-referred frame: out = ldr^gamma / time.
Image ldr_to_linear(const Image& img, const ExposureSpec& spec);

/// Render a linear frame back to the display domain:
/// clip((linear * time)^(1/gamma), 0, 1), quantized to 2^bits - 1 levels
/// round-to-nearest. bits == 0 skips quantization.
Image linear_to_ldr(const Image& img, const ExposureSpec& spec, int bits);

/// Scalar mu-law core, double precision: log(1 + mu*h) / log(1 + mu).
double mu_tonemap_value(double h, double mu = kDefaultMu);

/// Element-wise mu-law tonemapping of a [0,1]-normalized image.
Image mu_tonemap(const Image& img, double mu = kDefaultMu);

/// Mean absolute difference of the mu-law tonemapped inputs.
double mu_l1_loss(const Image& estimate, const Image& truth, double mu = kDefaultMu);

/// Weighted multi-exposure merge with the hat weight w(z) = max(0, 1-|2z-1|).
/// Pixels clipped in every shot fall back to the shortest exposure when
/// bright-clipped and the longest when dark-clipped.
Image merge_stack_to_hdr(const MultiExposureStack& stack);

/// Assemble an alternating sequence: frame i takes the shot with
/// EV == pattern[i % |pattern|] from stack i.
AlternatingSequence make_alternating_sequence(const std::vector<MultiExposureStack>& stacks,
                                              const std::vector<int>& pattern);

/// Render a synthetic exposure stack from a known radiance field, with
/// optional additive Gaussian read noise (display domain, before
/// quantization). Deterministic for a fixed seed.
MultiExposureStack simulate_exposure_stack(const Image& hdr, const std::vector<int>& evs,
                                           int bits, double noise_sigma,
                                           uint64_t seed = 0x9e3779b97f4a7c15ull,
                                           double gamma = kDefaultGamma);

} // namespace hdrv
