#include "hdrv/local_align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hdrv/parallel.hpp"

namespace hdrv {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Mean wellness below this means the block saw only clipped pixels.
constexpr double kBlockWeightFloor = 1e-3;

} // namespace

Image asconv(const Image& img, const SeparableKernelField& kernels) {
    if (kernels.height != img.height || kernels.width != img.width)
        throw std::invalid_argument("asconv: kernel field dimensions do not match image");
    if (kernels.K % 2 == 0)
        throw std::invalid_argument("asconv: kernel length must be odd");
    const int h = img.height, w = img.width, K = kernels.K, half = K / 2;
    Image out(h, w, img.channels, img.domain);
    parallel_chunks(h, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const float* kv = kernels.kv_at(x, y);
                const float* kh = kernels.kh_at(x, y);
                for (int c = 0; c < img.channels; ++c) {
                    const float* s = img.plane(c);
                    double acc = 0.0;
                    for (int i = 0; i < K; ++i) {
                        const float kvi = kv[i];
                        if (kvi == 0.0f) continue;
                        const float* row =
                            s + static_cast<size_t>(clampi(y + i - half, 0, h - 1)) * w;
                        double racc = 0.0;
                        for (int j = 0; j < K; ++j) {
                            const float khj = kh[j];
                            if (khj == 0.0f) continue;
                            racc += khj * row[clampi(x + j - half, 0, w - 1)];
                        }
                        acc += kvi * racc;
                    }
                    out.plane(c)[static_cast<size_t>(y) * w + x] = static_cast<float>(acc);
                }
            }
        }
    });
    return out;
}

namespace {

// Delta kernel at offset d, triangle-softened ((1/4,1/2,1/4), clipped at the
// support edge and renormalized). Zero offsets stay pure deltas so already
// aligned content passes through untouched.
void write_delta_kernel(float* taps, int K, int d) {
    const int half = K / 2;
    std::fill(taps, taps + K, 0.0f);
    if (d == 0) {
        taps[half] = 1.0f;
        return;
    }
    static const float tri[3] = {0.25f, 0.5f, 0.25f};
    float sum = 0.0f;
    for (int t = -1; t <= 1; ++t) {
        const int idx = half + d + t;
        if (idx < 0 || idx >= K) continue;
        taps[idx] = tri[t + 1];
        sum += tri[t + 1];
    }
    for (int i = 0; i < K; ++i) taps[i] /= sum;
}

} // namespace

BlockMatchResult estimate_kernels_block_match(const Image& ref, const Image& nbr,
                                              const MaskSet& masks_ref,
                                              const MaskSet& masks_nbr, int radius, int block,
                                              int kernel_size) {
    if (!ref.same_shape(nbr))
        throw std::invalid_argument("estimate_kernels_block_match: frames differ in shape");
    if (block > ref.height || block > ref.width)
        throw std::invalid_argument("estimate_kernels_block_match: block larger than image");
    if (radius < 1 || radius > kernel_size / 2)
        throw std::invalid_argument("estimate_kernels_block_match: radius must be in [1, K/2]");

    const Image yref = to_luminance(ref);
    const Image ynbr = to_luminance(nbr);
    const int h = ref.height, w = ref.width;

    Image weight(h, w, 1, Domain::LinearHdr);
    for (size_t i = 0; i < weight.data.size(); ++i)
        weight.data[i] = std::min(masks_ref.wellness.data[i], masks_nbr.wellness.data[i]);

    BlockMatchResult res{SeparableKernelField(h, w, kernel_size), FlowField(h, w),
                         Image(h, w, 1, Domain::LinearHdr)};

    const int by = (h + block - 1) / block;
    parallel_chunks(by, [&](int b0, int b1) {
        for (int byy = b0; byy < b1; ++byy) {
            const int y0 = byy * block, y1 = std::min(h, y0 + block);
            for (int bx = 0; bx * block < w; ++bx) {
                const int x0 = bx * block, x1 = std::min(w, x0 + block);

                double wsum = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        wsum += weight.at(x, y);
                const int npix = (y1 - y0) * (x1 - x0);

                int best_dx = 0, best_dy = 0;
                double best_sad = std::numeric_limits<double>::infinity();
                double second_sad = std::numeric_limits<double>::infinity();
                double confidence = 0.0;

                if (wsum >= kBlockWeightFloor * npix) {
                    for (int dy = -radius; dy <= radius; ++dy) {
                        for (int dx = -radius; dx <= radius; ++dx) {
                            double sad = 0.0;
                            for (int y = y0; y < y1; ++y) {
                                const int sy = clampi(y + dy, 0, h - 1);
                                for (int x = x0; x < x1; ++x) {
                                    const int sx = clampi(x + dx, 0, w - 1);
                                    sad += weight.at(x, y) *
                                           std::abs(ynbr.at(sx, sy) - yref.at(x, y));
                                }
                            }
                            // ties go to the smallest displacement, then (dy,dx)
                            const long mag2 = static_cast<long>(dx) * dx +
                                              static_cast<long>(dy) * dy;
                            const long best_mag2 = static_cast<long>(best_dx) * best_dx +
                                                   static_cast<long>(best_dy) * best_dy;
                            const bool better =
                                sad < best_sad ||
                                (sad == best_sad &&
                                 (mag2 < best_mag2 ||
                                  (mag2 == best_mag2 &&
                                   std::pair(dy, dx) < std::pair(best_dy, best_dx))));
                            if (better) {
                                second_sad = best_sad;
                                best_sad = sad;
                                best_dx = dx;
                                best_dy = dy;
                            } else if (sad < second_sad) {
                                second_sad = sad;
                            }
                        }
                    }
                    confidence = std::isfinite(second_sad)
                                     ? std::clamp(1.0 - best_sad / (second_sad + 1e-9), 0.0, 1.0)
                                     : 1.0;
                }

                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        write_delta_kernel(res.kernels.kv_at(x, y), kernel_size, best_dy);
                        write_delta_kernel(res.kernels.kh_at(x, y), kernel_size, best_dx);
                        const size_t i = static_cast<size_t>(y) * w + x;
                        res.displacement.u[i] = static_cast<float>(best_dx);
                        res.displacement.v[i] = static_cast<float>(best_dy);
                        res.confidence.data[i] = static_cast<float>(confidence);
                    }
                }
            }
        }
    });
    return res;
}

namespace {

MaskSet split_mask(const Image& combined) {
    MaskSet m;
    const int h = combined.height, w = combined.width;
    m.contrast = Image(h, w, 1, Domain::LinearHdr);
    m.wellness = Image(h, w, 1, Domain::LdrDisplay);
    m.saturation = Image(h, w, 1, Domain::LinearHdr);
    const size_t n = static_cast<size_t>(h) * w;
    std::copy_n(combined.plane(0), n, m.contrast.plane(0));
    std::copy_n(combined.plane(1), n, m.wellness.plane(0));
    std::copy_n(combined.plane(2), n, m.saturation.plane(0));
    m.combined = combined;
    return m;
}

Image clamp_display(const Image& img) {
    Image out(img.height, img.width, img.channels, Domain::LdrDisplay);
    for (size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = std::clamp(img.data[i], 0.0f, 1.0f);
    return out;
}

Image ensure_rgb(const Image& img) {
    if (img.channels == 3) return img;
    Image out(img.height, img.width, 3, img.domain);
    const size_t n = img.pixel_count();
    for (int c = 0; c < 3; ++c) std::copy_n(img.plane(0), n, out.plane(c));
    return out;
}

FlowField upsample_flow(const FlowField& flow, int nh, int nw) {
    Image u(flow.height, flow.width, 1, Domain::LinearHdr);
    Image v(flow.height, flow.width, 1, Domain::LinearHdr);
    std::copy(flow.u.begin(), flow.u.end(), u.data.begin());
    std::copy(flow.v.begin(), flow.v.end(), v.data.begin());
    const Image uu = resample(u, nh, nw);
    const Image vv = resample(v, nh, nw);
    FlowField out(nh, nw);
    const float su = static_cast<float>(nw) / flow.width;
    const float sv = static_cast<float>(nh) / flow.height;
    for (size_t i = 0; i < out.u.size(); ++i) {
        out.u[i] = uu.data[i] * su;
        out.v[i] = vv.data[i] * sv;
    }
    return out;
}

} // namespace

AlignedFrame align_local_pyramid(const Image& ref, const Image& nbr,
                                 const LocalAlignOptions& opts, const Image* ref_ldr,
                                 const Image* nbr_ldr) {
    if (!ref.same_shape(nbr))
        throw std::invalid_argument("align_local_pyramid: frames differ in shape");
    if (opts.levels < 1)
        throw std::invalid_argument("align_local_pyramid: levels must be >= 1");

    const Image ref_mask_src = ref_ldr ? ensure_rgb(*ref_ldr) : ensure_rgb(clamp_display(ref));
    const Image nbr_mask_src = nbr_ldr ? ensure_rgb(*nbr_ldr) : ensure_rgb(clamp_display(nbr));
    const MaskSet mref = adaptive_mask(ref_mask_src);
    const MaskSet mnbr = adaptive_mask(nbr_mask_src);

    const Pyramid ref_pyr = build_pyramid(ref, opts.levels);
    const Pyramid nbr_pyr = build_pyramid(nbr, opts.levels);
    const int nlevels = static_cast<int>(ref_pyr.levels.size());
    const Pyramid mref_pyr = build_pyramid(mref.combined, nlevels);
    const Pyramid mnbr_pyr = build_pyramid(mnbr.combined, nlevels);

    FlowField total;       // committed displacement at the current level
    Image prewarped;       // neighbor brought forward by the committed flow
    Image prewarped_mask;  // its mask, transformed alongside
    SeparableKernelField finest_kernels;
    Image finest_confidence;

    for (int l = nlevels - 1; l >= 0; --l) {
        const Image& r = ref_pyr.levels[l];
        const Image& n = nbr_pyr.levels[l];
        const bool coarsest = (l == nlevels - 1);

        if (coarsest) {
            total = FlowField(r.height, r.width);
            prewarped = n;
            prewarped_mask = mnbr_pyr.levels[l];
        } else {
            total = upsample_flow(total, r.height, r.width);
            prewarped = warp_bilinear(n, total);
            prewarped_mask = warp_bilinear(mnbr_pyr.levels[l], total);
        }

        const int lvl1 = l + 1; // 1-based level index, 1 = finest
        const int radius =
            coarsest ? opts.radius
                     : std::max(2, (opts.radius + (1 << (nlevels - lvl1)) - 1) >>
                                       (nlevels - lvl1));

        BlockMatchResult bm = estimate_kernels_block_match(
            r, prewarped, split_mask(mref_pyr.levels[l]), split_mask(prewarped_mask), radius,
            opts.block, opts.kernel_size);

        for (size_t i = 0; i < total.u.size(); ++i) {
            total.u[i] += bm.displacement.u[i];
            total.v[i] += bm.displacement.v[i];
        }
        if (l == 0) {
            finest_kernels = std::move(bm.kernels);
            finest_confidence = std::move(bm.confidence);
        }
    }

    AlignedFrame out;
    out.image = asconv(prewarped, finest_kernels);
    out.displacement = std::move(total);
    out.confidence = std::move(finest_confidence);
    return out;
}

} // namespace hdrv
