#include "hdrv/global_align.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdrv/errors.hpp"
#include "hdrv/masks.hpp"
#include "hdrv/parallel.hpp"

namespace hdrv {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

} // namespace

OffsetBases make_offset_bases(int height, int width) {
    if (height < 8 || width < 8)
        throw std::invalid_argument("make_offset_bases: grid must be at least 8x8");
    OffsetBases ob;
    ob.height = height;
    ob.width = width;
    for (auto& b : ob.bases) b = FlowField(height, width);

    const double sx = 2.0 / (width - 1);
    const double sy = 2.0 / (height - 1);
    for (int y = 0; y < height; ++y) {
        const double ny = y * sy - 1.0;
        for (int x = 0; x < width; ++x) {
            const double nx = x * sx - 1.0;
            const size_t i = static_cast<size_t>(y) * width + x;
            const double u[8] = {1.0, 0.0, -ny, ny, nx, 0.0, nx * nx, nx * ny};
            const double v[8] = {0.0, 1.0, nx, nx, 0.0, ny, nx * ny, ny * ny};
            for (int k = 0; k < 8; ++k) {
                ob.bases[k].u[i] = static_cast<float>(u[k]);
                ob.bases[k].v[i] = static_cast<float>(v[k]);
            }
        }
    }
    // unit max displacement per basis
    for (auto& b : ob.bases) {
        double max2 = 0.0;
        for (size_t i = 0; i < b.u.size(); ++i)
            max2 = std::max(max2, static_cast<double>(b.u[i]) * b.u[i] +
                                      static_cast<double>(b.v[i]) * b.v[i]);
        const float inv = static_cast<float>(1.0 / std::sqrt(max2));
        for (size_t i = 0; i < b.u.size(); ++i) {
            b.u[i] *= inv;
            b.v[i] *= inv;
        }
    }
    return ob;
}

FlowField compose_global_flow(const GlobalWeights& weights, const OffsetBases& bases) {
    FlowField flow(bases.height, bases.width);
    for (int k = 0; k < 8; ++k) {
        const float a = static_cast<float>(weights.alpha[k]);
        if (a == 0.0f) continue;
        const FlowField& b = bases.bases[k];
        for (size_t i = 0; i < flow.u.size(); ++i) {
            flow.u[i] += a * b.u[i];
            flow.v[i] += a * b.v[i];
        }
    }
    return flow;
}

Image warp_bilinear(const Image& img, const FlowField& flow) {
    if (flow.height != img.height || flow.width != img.width)
        throw std::invalid_argument("warp_bilinear: flow dimensions do not match image");
    Image out(img.height, img.width, img.channels, img.domain);
    const int h = img.height, w = img.width;
    parallel_chunks(h, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t i = static_cast<size_t>(y) * w + x;
                const float sx = x + flow.u[i];
                const float sy = y + flow.v[i];
                const int ix = static_cast<int>(std::floor(sx));
                const int iy = static_cast<int>(std::floor(sy));
                const float tx = sx - ix;
                const float ty = sy - iy;
                const int x0 = clampi(ix, 0, w - 1), x1 = clampi(ix + 1, 0, w - 1);
                const int y0c = clampi(iy, 0, h - 1), y1c = clampi(iy + 1, 0, h - 1);
                for (int c = 0; c < img.channels; ++c) {
                    const float* s = img.plane(c);
                    const float a = s[static_cast<size_t>(y0c) * w + x0];
                    const float b = s[static_cast<size_t>(y0c) * w + x1];
                    const float cc = s[static_cast<size_t>(y1c) * w + x0];
                    const float d = s[static_cast<size_t>(y1c) * w + x1];
                    const float top = a + tx * (b - a);
                    const float bot = cc + tx * (d - cc);
                    out.plane(c)[i] = top + ty * (bot - top);
                }
            }
        }
    });
    return out;
}

namespace {

constexpr double kCharbonnierEps = 1e-3;

// Catmull-Rom weights and their derivatives at fractional offset t.
// C1 sampling keeps the objective differentiable in alpha, so the analytic
// gradient matches finite differences; plain bilinear has kinks at every
// pixel boundary.
inline void cr_weights(double t, double w[4], double dw[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = -0.5 * t + t2 - 0.5 * t3;
    w[1] = 1.0 - 2.5 * t2 + 1.5 * t3;
    w[2] = 0.5 * t + 2.0 * t2 - 1.5 * t3;
    w[3] = -0.5 * t2 + 0.5 * t3;
    dw[0] = -0.5 + 2.0 * t - 1.5 * t2;
    dw[1] = -5.0 * t + 4.5 * t2;
    dw[2] = 0.5 + 4.0 * t - 4.5 * t2;
    dw[3] = -t + 1.5 * t2;
}

struct SampleGrad {
    double value, ddx, ddy;
};

inline SampleGrad sample_cr(const float* img, int h, int w, double sx, double sy) {
    const int ix = static_cast<int>(std::floor(sx));
    const int iy = static_cast<int>(std::floor(sy));
    double wx[4], dwx[4], wy[4], dwy[4];
    cr_weights(sx - ix, wx, dwx);
    cr_weights(sy - iy, wy, dwy);
    int xs[4], ys[4];
    for (int t = 0; t < 4; ++t) {
        xs[t] = clampi(ix - 1 + t, 0, w - 1);
        ys[t] = clampi(iy - 1 + t, 0, h - 1);
    }
    SampleGrad out{0.0, 0.0, 0.0};
    for (int j = 0; j < 4; ++j) {
        const float* row = img + static_cast<size_t>(ys[j]) * w;
        double rv = 0.0, rd = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double s = row[xs[i]];
            rv += wx[i] * s;
            rd += dwx[i] * s;
        }
        out.value += wy[j] * rv;
        out.ddx += wy[j] * rd;
        out.ddy += dwy[j] * rv;
    }
    return out;
}

} // namespace

Image warp_catmull_rom(const Image& img, const FlowField& flow) {
    if (flow.height != img.height || flow.width != img.width)
        throw std::invalid_argument("warp_catmull_rom: flow dimensions do not match image");
    Image out(img.height, img.width, img.channels, img.domain);
    const int h = img.height, w = img.width;
    parallel_chunks(h, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y)
            for (int x = 0; x < w; ++x) {
                const size_t i = static_cast<size_t>(y) * w + x;
                for (int c = 0; c < img.channels; ++c)
                    out.plane(c)[i] = static_cast<float>(
                        sample_cr(img.plane(c), h, w, x + flow.u[i], y + flow.v[i]).value);
            }
    });
    return out;
}

namespace {

Image default_valid_mask(const Image& ref, const Image& nbr) {
    auto clamp01 = [](const Image& img) {
        Image out(img.height, img.width, img.channels, Domain::LdrDisplay);
        for (size_t i = 0; i < img.data.size(); ++i)
            out.data[i] = std::clamp(img.data[i], 0.0f, 1.0f);
        return out;
    };
    const Image wr = wellness_map(clamp01(ref));
    const Image wn = wellness_map(clamp01(nbr));
    Image valid(ref.height, ref.width, 1, Domain::LinearHdr);
    for (size_t i = 0; i < valid.data.size(); ++i)
        valid.data[i] =
            (std::min(wr.data[i], wn.data[i]) >= kSaturationWellnessMin) ? 1.0f : 0.0f;
    return valid;
}

struct Partial {
    double loss = 0.0;
    double wsum = 0.0;
    std::array<double, 8> grad{};
};

LossGrad objective(const Image& ref, const Image& nbr, const GlobalWeights& alpha,
                   const OffsetBases& bases, const Image* valid_weights, bool want_grad) {
    if (!ref.same_shape(nbr))
        throw std::invalid_argument("photometric objective: frames have different shapes");
    if (bases.height != ref.height || bases.width != ref.width)
        throw std::invalid_argument("photometric objective: bases built for a different grid");
    Image fallback_valid;
    if (!valid_weights) {
        fallback_valid = default_valid_mask(ref, nbr);
        valid_weights = &fallback_valid;
    }
    if (valid_weights->height != ref.height || valid_weights->width != ref.width ||
        valid_weights->channels != 1)
        throw std::invalid_argument("photometric objective: bad valid-weights shape");

    const int h = ref.height, w = ref.width, nc = ref.channels;
    constexpr int kChunk = 16;
    std::vector<Partial> parts((h + kChunk - 1) / kChunk);

    parallel_chunks(h, [&](int y0, int y1) {
        Partial& acc = parts[y0 / kChunk];
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const size_t i = static_cast<size_t>(y) * w + x;
                const double wt = valid_weights->data[i];
                if (wt <= 0.0) continue;
                double u = 0.0, v = 0.0;
                for (int k = 0; k < 8; ++k) {
                    u += alpha.alpha[k] * bases.bases[k].u[i];
                    v += alpha.alpha[k] * bases.bases[k].v[i];
                }
                const double sx = x + u, sy = y + v;
                for (int c = 0; c < nc; ++c) {
                    const SampleGrad s = sample_cr(nbr.plane(c), h, w, sx, sy);
                    const double e = s.value - ref.plane(c)[i];
                    const double rho = std::sqrt(e * e + kCharbonnierEps * kCharbonnierEps);
                    acc.loss += wt * rho;
                    if (want_grad) {
                        const double drho = wt * e / rho;
                        for (int k = 0; k < 8; ++k)
                            acc.grad[k] += drho * (s.ddx * bases.bases[k].u[i] +
                                                   s.ddy * bases.bases[k].v[i]);
                    }
                }
                acc.wsum += wt;
            }
        }
    });

    Partial total;
    for (const Partial& p : parts) {
        total.loss += p.loss;
        total.wsum += p.wsum;
        for (int k = 0; k < 8; ++k) total.grad[k] += p.grad[k];
    }
    if (total.wsum <= 0.0)
        throw std::invalid_argument("photometric objective: every pixel is masked out");

    LossGrad out;
    const double norm = 1.0 / (total.wsum * nc);
    out.loss = total.loss * norm;
    for (int k = 0; k < 8; ++k) out.grad[k] = total.grad[k] * norm;
    return out;
}

} // namespace

LossGrad photometric_loss_and_grad(const Image& ref, const Image& nbr,
                                   const GlobalWeights& alpha, const OffsetBases& bases,
                                   const Image* valid_weights) {
    return objective(ref, nbr, alpha, bases, valid_weights, true);
}

double photometric_loss(const Image& ref, const Image& nbr, const GlobalWeights& alpha,
                        const OffsetBases& bases, const Image* valid_weights) {
    return objective(ref, nbr, alpha, bases, valid_weights, false).loss;
}

GlobalWeights fit_global_weights(const Image& ref, const Image& nbr,
                                 const GlobalAlignOptions& opts, const Image* valid_weights) {
    if (opts.levels < 1 || opts.iters_per_level < 1 || opts.step <= 0.0)
        throw std::invalid_argument("fit_global_weights: bad options");
    const Pyramid ref_pyr = build_pyramid(ref, opts.levels);
    const Pyramid nbr_pyr = build_pyramid(nbr, opts.levels);
    Image valid_full =
        valid_weights ? *valid_weights : default_valid_mask(ref, nbr);
    const Pyramid valid_pyr = build_pyramid(valid_full, static_cast<int>(ref_pyr.levels.size()));

    const int nlevels = static_cast<int>(ref_pyr.levels.size());
    // candidate solutions expressed at full resolution, zero always included
    std::vector<GlobalWeights> candidates{GlobalWeights{}};

    GlobalWeights alpha{};
    for (int l = nlevels - 1; l >= 0; --l) {
        const Image& r = ref_pyr.levels[l];
        const Image& n = nbr_pyr.levels[l];
        const Image& vw = valid_pyr.levels[l];
        const OffsetBases bases = make_offset_bases(r.height, r.width);

        double step = opts.step;
        for (int it = 0; it < opts.iters_per_level; ++it) {
            const LossGrad lg = photometric_loss_and_grad(r, n, alpha, bases, &vw);
            if (!std::isfinite(lg.loss))
                throw NumericError("fit_global_weights: non-finite loss at level " +
                                   std::to_string(l) + " iteration " + std::to_string(it));
            double g2 = 0.0;
            for (double g : lg.grad) g2 += g * g;
            if (g2 < 1e-20) break;

            bool accepted = false;
            for (double t = step; t >= 1e-10; t *= 0.5) {
                GlobalWeights cand = alpha;
                for (int k = 0; k < 8; ++k) cand.alpha[k] -= t * lg.grad[k];
                const double cl = photometric_loss(r, n, cand, bases, &vw);
                if (!std::isfinite(cl))
                    throw NumericError("fit_global_weights: non-finite loss at level " +
                                       std::to_string(l) + " iteration " + std::to_string(it));
                if (cl < lg.loss - 1e-4 * t * g2) {
                    alpha = cand;
                    step = t * 1.5;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) break;
        }

        // express the per-level solution at full resolution; the basis
        // patterns are resolution-invariant with unit-max normalization, so
        // every component scales with the grid
        GlobalWeights at_full = alpha;
        for (int k = 0; k < 8; ++k) at_full.alpha[k] *= std::exp2(static_cast<double>(l));
        candidates.push_back(at_full);

        if (l > 0)
            for (int k = 0; k < 8; ++k) alpha.alpha[k] *= 2.0;
    }

    const OffsetBases full_bases = make_offset_bases(ref.height, ref.width);
    GlobalWeights best{};
    double best_loss = std::numeric_limits<double>::infinity();
    for (const GlobalWeights& c : candidates) {
        const double loss = photometric_loss(ref, nbr, c, full_bases, &valid_full);
        if (loss < best_loss) {
            best_loss = loss;
            best = c;
        }
    }
    return best;
}

} // namespace hdrv
