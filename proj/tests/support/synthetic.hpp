#pragma once

// Deterministic synthetic inputs shared by the unit and acceptance suites.

#include <cstdint>
#include <vector>

#include "hdrv/global_align.hpp"
#include "hdrv/image.hpp"
#include "hdrv/radiometry.hpp"

namespace testsup {

/// Multi-octave smoothed-noise texture, values normalized to [lo, hi].
hdrv::Image make_texture(int h, int w, uint64_t seed, int channels = 3, float lo = 0.05f,
                         float hi = 0.95f);

/// Scene-referred radiance field with textured shadows and bright
/// highlights, spanning roughly [floor, peak].
hdrv::Image make_radiance_field(int h, int w, uint64_t seed, double floor_value = 0.02,
                                double peak = 6.0);

/// Integer content shift with clamped borders: out(x,y) = in(x-dx, y-dy).
hdrv::Image shift_image(const hdrv::Image& img, int dx, int dy);

/// Constant backward flow (u,v) everywhere.
hdrv::FlowField constant_flow(int h, int w, float u, float v);

/// Mean endpoint error between two flows, skipping a border margin.
double mean_epe(const hdrv::FlowField& a, const hdrv::FlowField& b, int margin);

/// Mean endpoint error of a flow against a constant displacement.
double mean_epe_const(const hdrv::FlowField& a, float u, float v, int margin);

/// An alternating-exposure scene with per-frame ground truth.
struct SyntheticScene {
    std::vector<hdrv::Image> truth; // LinearHdr, one per frame
    hdrv::AlternatingSequence seq;
};

/// Camera translating over a static radiance field (integer steps/frame).
SyntheticScene make_global_motion_scene(uint64_t seed, int frames = 8, int h = 192, int w = 256,
                                        int step_x = 5, int step_y = 3);

/// Static camera, one bright textured object translating across frames.
SyntheticScene make_local_motion_scene(uint64_t seed, int frames = 8, int h = 192, int w = 256,
                                       int step_x = 6, int step_y = 2);

/// Both camera and object motion.
SyntheticScene make_full_motion_scene(uint64_t seed, int frames = 8, int h = 192, int w = 256);

} // namespace testsup
