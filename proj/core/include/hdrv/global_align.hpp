#pragma once

#include <array>

#include "hdrv/image.hpp"

namespace hdrv {

/// Dense backward displacement in pixels, x-right / y-down.
struct FlowField {
    int height = 0;
    int width = 0;
    std::vector<float> u, v;

    FlowField() = default;
    FlowField(int h, int w)
        : height(h), width(w), u(static_cast<size_t>(h) * w, 0.0f),
          v(static_cast<size_t>(h) * w, 0.0f) {}
};

/// The 8 fixed flow fields spanning the tangent space of 8-DoF
/// homographies: x/y translation, rotation, shear, x/y scale, and the two
/// quadratic perspective fields, on normalized coordinates in [-1,1]^2.
/// Each basis is rescaled so its maximum displacement magnitude over the
/// grid is exactly 1 pixel, making weights commensurable in pixels.
struct OffsetBases {
    int height = 0;
    int width = 0;
    std::array<FlowField, 8> bases;
};

/// The 8 basis weights; units are pixels of maximum displacement.
struct GlobalWeights {
    std::array<double, 8> alpha{};
};

struct GlobalAlignOptions {
    int levels = 3;
    int iters_per_level = 100;
    double step = 1.0;
};

struct LossGrad {
    double loss = 0.0;
    std::array<double, 8> grad{};
};

/// Wellness below this marks a pixel as clipped: it carries no
/// brightness-constancy information across exposures.
inline constexpr double kSaturationWellnessMin = 0.02;

OffsetBases make_offset_bases(int height, int width);

/// O = sum_k alpha_k n_k. Exactly linear in alpha.
FlowField compose_global_flow(const GlobalWeights& weights, const OffsetBases& bases);

/// Backward warp: out(p) = img(p + flow(p)), bilinear, clamp-to-edge.
Image warp_bilinear(const Image& img, const FlowField& flow);

/// Backward warp with the same C1 Catmull-Rom sampler the photometric
/// objective differentiates through (diagnostics and synthesis).
Image warp_catmull_rom(const Image& img, const FlowField& flow);

/// Charbonnier photometric objective of warping nbr onto ref by the
/// basis-composed flow, with its exact analytic gradient in alpha.
/// valid_weights (1-channel, optional) weighs pixels; when null, pixels
/// with wellness below kSaturationWellnessMin in either frame are dropped.
LossGrad photometric_loss_and_grad(const Image& ref, const Image& nbr,
                                   const GlobalWeights& alpha, const OffsetBases& bases,
                                   const Image* valid_weights = nullptr);

/// Loss only (line-search helper); same objective as photometric_loss_and_grad.
double photometric_loss(const Image& ref, const Image& nbr, const GlobalWeights& alpha,
                        const OffsetBases& bases, const Image* valid_weights = nullptr);

/// Coarse-to-fine gradient descent with backtracking line search on the
/// photometric objective. Returns the weights with the lowest
/// full-resolution loss among the per-level solutions and zero.
GlobalWeights fit_global_weights(const Image& ref, const Image& nbr,
                                 const GlobalAlignOptions& opts = {},
                                 const Image* valid_weights = nullptr);

} // namespace hdrv
