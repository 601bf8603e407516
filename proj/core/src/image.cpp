#include "hdrv/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hdrv/errors.hpp"
#include "hdrv/parallel.hpp"

namespace hdrv {

Image::Image(int h, int w, int c, Domain d, float fill)
    : height(h), width(w), channels(c), domain(d),
      data(static_cast<size_t>(h) * w * c, fill) {
    if (h < 1 || w < 1 || (c != 1 && c != 3))
        throw std::invalid_argument("Image: bad shape " + std::to_string(h) + "x" +
                                    std::to_string(w) + "x" + std::to_string(c));
}

void validate(const Image& img, const std::string& context) {
    const std::string where = context.empty() ? "image" : context;
    if (img.height < 1 || img.width < 1)
        throw ValidationError(where + ": empty image");
    if (img.channels != 1 && img.channels != 3)
        throw ValidationError(where + ": unsupported channel count " +
                              std::to_string(img.channels));
    if (img.data.size() != img.pixel_count() * img.channels)
        throw ValidationError(where + ": data length does not match dimensions");
    for (size_t i = 0; i < img.data.size(); ++i) {
        const float v = img.data[i];
        if (!std::isfinite(v))
            throw ValidationError(where + ": non-finite value at index " + std::to_string(i));
        if (img.domain == Domain::LdrDisplay) {
            if (v < 0.0f || v > 1.0f)
                throw ValidationError(where + ": LDR value " + std::to_string(v) +
                                      " outside [0,1] at index " + std::to_string(i));
        } else if (v < 0.0f) {
            throw ValidationError(where + ": negative HDR value at index " + std::to_string(i));
        }
    }
}

Image to_luminance(const Image& img) {
    if (img.channels == 1)
        return img;
    Image out(img.height, img.width, 1, img.domain);
    const float* r = img.plane(0);
    const float* g = img.plane(1);
    const float* b = img.plane(2);
    float* y = out.plane(0);
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i)
        y[i] = 0.2126f * r[i] + 0.7152f * g[i] + 0.0722f * b[i];
    return out;
}

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

} // namespace

Image resample(const Image& img, int new_h, int new_w) {
    if (new_h < 1 || new_w < 1)
        throw std::invalid_argument("resample: target size must be >= 1");
    if (new_h == img.height && new_w == img.width)
        return img;
    Image out(new_h, new_w, img.channels, img.domain);
    const double sy = static_cast<double>(img.height) / new_h;
    const double sx = static_cast<double>(img.width) / new_w;
    for (int c = 0; c < img.channels; ++c) {
        const float* src = img.plane(c);
        float* dst = out.plane(c);
        for (int y = 0; y < new_h; ++y) {
            const double fy = (y + 0.5) * sy - 0.5;
            int y0 = static_cast<int>(std::floor(fy));
            const float ty = static_cast<float>(fy - y0);
            const int y0c = clampi(y0, 0, img.height - 1);
            const int y1c = clampi(y0 + 1, 0, img.height - 1);
            for (int x = 0; x < new_w; ++x) {
                const double fx = (x + 0.5) * sx - 0.5;
                int x0 = static_cast<int>(std::floor(fx));
                const float tx = static_cast<float>(fx - x0);
                const int x0c = clampi(x0, 0, img.width - 1);
                const int x1c = clampi(x0 + 1, 0, img.width - 1);
                const float a = src[static_cast<size_t>(y0c) * img.width + x0c];
                const float b = src[static_cast<size_t>(y0c) * img.width + x1c];
                const float cc = src[static_cast<size_t>(y1c) * img.width + x0c];
                const float d = src[static_cast<size_t>(y1c) * img.width + x1c];
                const float top = a + tx * (b - a);
                const float bot = cc + tx * (d - cc);
                dst[static_cast<size_t>(y) * new_w + x] = top + ty * (bot - top);
            }
        }
    }
    return out;
}

namespace {

// 5-tap binomial [1,4,6,4,1]/16 along one axis, clamp-to-edge.
void binomial_pass(const float* src, float* dst, int h, int w, bool vertical) {
    static const float k[5] = {1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};
    if (vertical) {
        for (int y = 0; y < h; ++y) {
            const int ys[5] = {clampi(y - 2, 0, h - 1), clampi(y - 1, 0, h - 1), y,
                               clampi(y + 1, 0, h - 1), clampi(y + 2, 0, h - 1)};
            for (int x = 0; x < w; ++x) {
                float acc = 0.0f;
                for (int t = 0; t < 5; ++t)
                    acc += k[t] * src[static_cast<size_t>(ys[t]) * w + x];
                dst[static_cast<size_t>(y) * w + x] = acc;
            }
        }
    } else {
        for (int y = 0; y < h; ++y) {
            const float* row = src + static_cast<size_t>(y) * w;
            float* orow = dst + static_cast<size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                float acc = 0.0f;
                for (int t = 0; t < 5; ++t)
                    acc += k[t] * row[clampi(x - 2 + t, 0, w - 1)];
                orow[x] = acc;
            }
        }
    }
}

} // namespace

Image downsample2(const Image& img) {
    const int nh = img.height / 2;
    const int nw = img.width / 2;
    if (nh < 1 || nw < 1)
        throw std::invalid_argument("downsample2: image too small");
    Image out(nh, nw, img.channels, img.domain);
    std::vector<float> tmp(img.pixel_count());
    std::vector<float> smooth(img.pixel_count());
    for (int c = 0; c < img.channels; ++c) {
        binomial_pass(img.plane(c), tmp.data(), img.height, img.width, true);
        binomial_pass(tmp.data(), smooth.data(), img.height, img.width, false);
        float* dst = out.plane(c);
        for (int y = 0; y < nh; ++y)
            for (int x = 0; x < nw; ++x)
                dst[static_cast<size_t>(y) * nw + x] =
                    smooth[static_cast<size_t>(2 * y) * img.width + 2 * x];
    }
    return out;
}

Pyramid build_pyramid(const Image& img, int levels) {
    if (levels < 1)
        throw std::invalid_argument("build_pyramid: levels must be >= 1");
    Pyramid pyr;
    int usable = 1;
    int h = img.height, w = img.width;
    while (usable < levels && h / 2 >= 8 && w / 2 >= 8) {
        ++usable;
        h /= 2;
        w /= 2;
    }
    pyr.clamped = usable < levels;
    pyr.levels.reserve(usable);
    pyr.levels.push_back(img);
    for (int l = 1; l < usable; ++l)
        pyr.levels.push_back(downsample2(pyr.levels.back()));
    return pyr;
}

} // namespace hdrv
