#include "hdrv/masks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdrv {

namespace {
inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }
} // namespace

Image contrast_map(const Image& img) {
    const Image y = to_luminance(img);
    Image out(y.height, y.width, 1, Domain::LinearHdr);
    const float* s = y.plane(0);
    float* d = out.plane(0);
    const int h = y.height, w = y.width;
    for (int yy = 0; yy < h; ++yy) {
        const int yu = clampi(yy - 1, 0, h - 1), yd = clampi(yy + 1, 0, h - 1);
        for (int xx = 0; xx < w; ++xx) {
            const int xl = clampi(xx - 1, 0, w - 1), xr = clampi(xx + 1, 0, w - 1);
            const float lap = s[static_cast<size_t>(yu) * w + xx] +
                              s[static_cast<size_t>(yd) * w + xx] +
                              s[static_cast<size_t>(yy) * w + xl] +
                              s[static_cast<size_t>(yy) * w + xr] -
                              4.0f * s[static_cast<size_t>(yy) * w + xx];
            d[static_cast<size_t>(yy) * w + xx] = std::abs(lap);
        }
    }
    return out;
}

Image wellness_map(const Image& img, double sigma) {
    if (sigma <= 0.0)
        throw std::invalid_argument("wellness_map: sigma must be positive");
    Image out(img.height, img.width, 1, Domain::LdrDisplay);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    const size_t n = img.pixel_count();
    float* d = out.plane(0);
    std::fill(d, d + n, 1.0f);
    for (int c = 0; c < img.channels; ++c) {
        const float* s = img.plane(c);
        for (size_t i = 0; i < n; ++i) {
            const double dv = static_cast<double>(s[i]) - 0.5;
            d[i] = static_cast<float>(d[i] * std::exp(-dv * dv * inv2s2));
        }
    }
    return out;
}

Image saturation_map(const Image& img) {
    if (img.channels != 3)
        throw std::invalid_argument("saturation_map: requires a 3-channel image");
    Image out(img.height, img.width, 1, Domain::LinearHdr);
    const float* r = img.plane(0);
    const float* g = img.plane(1);
    const float* b = img.plane(2);
    float* d = out.plane(0);
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        const double m = (static_cast<double>(r[i]) + g[i] + b[i]) / 3.0;
        const double vr = r[i] - m, vg = g[i] - m, vb = b[i] - m;
        d[i] = static_cast<float>(std::sqrt((vr * vr + vg * vg + vb * vb) / 3.0));
    }
    return out;
}

MaskSet adaptive_mask(const Image& img) {
    MaskSet m;
    m.contrast = contrast_map(img);
    m.wellness = wellness_map(img);
    m.saturation = saturation_map(img);
    m.combined = Image(img.height, img.width, 3, Domain::LinearHdr);
    const size_t n = img.pixel_count();
    std::copy_n(m.contrast.plane(0), n, m.combined.plane(0));
    std::copy_n(m.wellness.plane(0), n, m.combined.plane(1));
    std::copy_n(m.saturation.plane(0), n, m.combined.plane(2));
    return m;
}

} // namespace hdrv
