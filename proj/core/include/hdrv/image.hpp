#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace hdrv {

/// Value domain of an image: display-referred LDR in [0,1] or
/// scene-referred linear radiance in [0,inf).
enum class Domain { LdrDisplay, LinearHdr };

/// Planar row-major float raster. Channel c of pixel (x,y) lives at
/// data[(c*height + y)*width + x]; interleaved file formats are
/// transposed at the I/O boundary.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 1;
    Domain domain = Domain::LdrDisplay;
    std::vector<float> data;

    Image() = default;
    Image(int h, int w, int c, Domain d, float fill = 0.0f);

    float& at(int x, int y, int c = 0) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    float at(int x, int y, int c = 0) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    /// Channel plane start for raw loops.
    float* plane(int c) { return data.data() + static_cast<size_t>(c) * height * width; }
    const float* plane(int c) const { return data.data() + static_cast<size_t>(c) * height * width; }

    size_t pixel_count() const { return static_cast<size_t>(height) * width; }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

/// Throws ValidationError if the image breaks its domain invariants.
void validate(const Image& img, const std::string& context = "");

/// Coarse-to-fine image stack. levels[0] is full resolution; each next
/// level is half width and half height (floor). `clamped` is set when the
/// requested level count had to be reduced to keep every level >= 8x8.
struct Pyramid {
    std::vector<Image> levels;
    bool clamped = false;
};

// --- file I/O ------------------------------------------------------------

/// Decode .pfm/.png/.ppm into a float image tagged with expected_domain.
/// Integer formats are scaled by 1/255 or 1/65535. PNG and PPM may only be
/// loaded as LdrDisplay; PFM accepts either domain and is validated.
Image load_image(const std::filesystem::path& path, Domain expected_domain);

/// Encode to the format implied by the extension. PFM is lossless 32-bit
/// little-endian; integer formats quantize round-to-nearest with
/// `bits` precision (8 or 16, .png only; .ppm always 8). LinearHdr images
/// may only target .pfm.
void save_image(const Image& img, const std::filesystem::path& path, int bits = 8);

// --- color / resampling ---------------------------------------------------

/// Rec. 709 luma weights: Y = 0.2126 R + 0.7152 G + 0.0722 B.
/// 1-channel input is returned unchanged.
Image to_luminance(const Image& img);

/// Bilinear resize with half-pixel-centered sampling and clamp-to-edge.
Image resample(const Image& img, int new_h, int new_w);

/// Build a pyramid by repeated 5-tap binomial low-pass ([1,4,6,4,1]/16 per
/// axis, edge-clamped) and 2x decimation. Level count is clamped so every
/// level stays at least 8x8.
Pyramid build_pyramid(const Image& img, int levels);

/// One smooth+decimate step of build_pyramid (exposed for flow/mask reuse).
Image downsample2(const Image& img);

} // namespace hdrv
