#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "hdrv/errors.hpp"
#include "hdrv/image.hpp"

namespace hdrv {

namespace {

static_assert(std::endian::native == std::endian::little,
              "PFM I/O assumes a little-endian host");

std::string lower_ext(const std::filesystem::path& path) {
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e;
}

[[noreturn]] void decode_fail(const std::filesystem::path& path, std::streampos at,
                              const std::string& what) {
    throw DecodeError(path.string() + ": " + what + " (byte offset " +
                      std::to_string(static_cast<long long>(at)) + ")");
}

// Whitespace-delimited PFM header token, honoring '#' comments.
std::string pfm_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            while (in.get(c) && c != '\n') {}
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(c);
    }
    return tok;
}

Image load_pfm(const std::filesystem::path& path, Domain expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DecodeError(path.string() + ": cannot open");
    const std::string magic = pfm_token(in);
    int channels;
    if (magic == "PF")
        channels = 3;
    else if (magic == "Pf")
        channels = 1;
    else
        decode_fail(path, in.tellg(), "bad PFM magic '" + magic + "'");
    int w = 0, h = 0;
    double scale = 0.0;
    try {
        w = std::stoi(pfm_token(in));
        h = std::stoi(pfm_token(in));
        scale = std::stod(pfm_token(in));
    } catch (const std::exception&) {
        decode_fail(path, in.tellg(), "malformed PFM dimensions/scale");
    }
    if (w < 1 || h < 1)
        decode_fail(path, in.tellg(), "non-positive PFM dimensions");
    if (scale >= 0.0)
        decode_fail(path, in.tellg(), "big-endian PFM not supported (scale >= 0)");

    Image img(h, w, channels, expected);
    std::vector<float> row(static_cast<size_t>(w) * channels);
    // PFM stores rows bottom-up, samples interleaved.
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in)
            decode_fail(path, in.tellg(), "truncated PFM payload");
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                img.at(x, y, c) = row[static_cast<size_t>(x) * channels + c];
    }
    const float mag = static_cast<float>(-scale);
    if (mag != 1.0f)
        for (float& v : img.data) v *= mag;
    validate(img, path.string());
    return img;
}

void save_pfm(const Image& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    out << (img.channels == 3 ? "PF" : "Pf") << "\n"
        << img.width << " " << img.height << "\n-1.0\n";
    std::vector<float> row(static_cast<size_t>(img.width) * img.channels);
    for (int y = img.height - 1; y >= 0; --y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                row[static_cast<size_t>(x) * img.channels + c] = img.at(x, y, c);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out)
        throw std::runtime_error(path.string() + ": write failed");
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

Image load_png(const std::filesystem::path& path) {
    PngReader r;
    r.fp = std::fopen(path.string().c_str(), "rb");
    if (!r.fp)
        throw DecodeError(path.string() + ": cannot open");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, r.fp) != 8 || png_sig_cmp(sig, 0, 8))
        decode_fail(path, 0, "not a PNG file");
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    r.info = png_create_info_struct(r.png);
    if (!r.png || !r.info)
        throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(r.png)))
        throw DecodeError(path.string() + ": libpng decode error");
    png_init_io(r.png, r.fp);
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_alpha(r.png);
    if (bit_depth == 16) png_set_swap(r.png); // PNG is big-endian on disk
    png_read_update_info(r.png, r.info);

    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    const int depth = png_get_bit_depth(r.png, r.info);
    const int nch = png_get_channels(r.png, r.info);
    if (nch != 1 && nch != 3)
        throw DecodeError(path.string() + ": unsupported channel count " + std::to_string(nch));

    const size_t rowbytes = png_get_rowbytes(r.png, r.info);
    std::vector<unsigned char> buf(rowbytes * h);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = buf.data() + rowbytes * y;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    Image img(h, w, nch, Domain::LdrDisplay);
    if (depth == 8) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < nch; ++c)
                    img.at(x, y, c) = buf[rowbytes * y + static_cast<size_t>(x) * nch + c] / 255.0f;
    } else {
        for (int y = 0; y < h; ++y) {
            const uint16_t* row = reinterpret_cast<const uint16_t*>(buf.data() + rowbytes * y);
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < nch; ++c)
                    img.at(x, y, c) = row[static_cast<size_t>(x) * nch + c] / 65535.0f;
        }
    }
    return img;
}

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void save_png(const Image& img, const std::filesystem::path& path, int bits) {
    if (bits != 8 && bits != 16)
        throw std::invalid_argument("save_image: PNG bit depth must be 8 or 16");
    PngWriter w;
    w.fp = std::fopen(path.string().c_str(), "wb");
    if (!w.fp)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = png_create_info_struct(w.png);
    if (!w.png || !w.info)
        throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(w.png)))
        throw std::runtime_error(path.string() + ": libpng encode error");
    png_init_io(w.png, w.fp);
    png_set_IHDR(w.png, w.info, img.width, img.height, bits,
                 img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    if (bits == 16) png_set_swap(w.png);

    const float maxv = static_cast<float>((1 << bits) - 1);
    if (bits == 8) {
        std::vector<unsigned char> row(static_cast<size_t>(img.width) * img.channels);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < img.channels; ++c)
                    row[static_cast<size_t>(x) * img.channels + c] =
                        static_cast<unsigned char>(std::lround(img.at(x, y, c) * maxv));
            png_write_row(w.png, row.data());
        }
    } else {
        std::vector<uint16_t> row(static_cast<size_t>(img.width) * img.channels);
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < img.channels; ++c)
                    row[static_cast<size_t>(x) * img.channels + c] =
                        static_cast<uint16_t>(std::lround(img.at(x, y, c) * maxv));
            png_write_row(w.png, reinterpret_cast<png_bytep>(row.data()));
        }
    }
    png_write_end(w.png, nullptr);
}

Image load_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DecodeError(path.string() + ": cannot open");
    if (pfm_token(in) != "P6")
        decode_fail(path, in.tellg(), "bad PPM magic (want P6)");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(pfm_token(in));
        h = std::stoi(pfm_token(in));
        maxval = std::stoi(pfm_token(in));
    } catch (const std::exception&) {
        decode_fail(path, in.tellg(), "malformed PPM header");
    }
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        decode_fail(path, in.tellg(), "bad PPM dimensions or maxval");
    Image img(h, w, 3, Domain::LdrDisplay);
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> row(static_cast<size_t>(w) * 3 * bytes);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in)
            decode_fail(path, in.tellg(), "truncated PPM payload");
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const size_t i = (static_cast<size_t>(x) * 3 + c) * bytes;
                // 2-byte PPM samples are big-endian
                const int v = bytes == 1 ? row[i] : (row[i] << 8) | row[i + 1];
                img.at(x, y, c) = static_cast<float>(v) / maxval;
            }
    }
    return img;
}

void save_ppm(const Image& img, const std::filesystem::path& path) {
    if (img.channels != 3)
        throw std::invalid_argument("save_image: PPM requires 3 channels");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                row[static_cast<size_t>(x) * 3 + c] =
                    static_cast<unsigned char>(std::lround(img.at(x, y, c) * 255.0f));
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out)
        throw std::runtime_error(path.string() + ": write failed");
}

} // namespace

Image load_image(const std::filesystem::path& path, Domain expected_domain) {
    const std::string ext = lower_ext(path);
    if (ext == ".pfm")
        return load_pfm(path, expected_domain);
    if (expected_domain != Domain::LdrDisplay)
        throw std::domain_error(path.string() + ": only .pfm can hold LinearHdr data");
    if (ext == ".png")
        return load_png(path);
    if (ext == ".ppm")
        return load_ppm(path);
    throw std::invalid_argument(path.string() + ": unsupported image extension '" + ext + "'");
}

void save_image(const Image& img, const std::filesystem::path& path, int bits) {
    const std::string ext = lower_ext(path);
    if (ext == ".pfm") {
        save_pfm(img, path);
        return;
    }
    if (img.domain != Domain::LdrDisplay)
        throw std::domain_error(path.string() + ": LinearHdr images may only be saved as .pfm");
    if (ext == ".png")
        save_png(img, path, bits);
    else if (ext == ".ppm")
        save_ppm(img, path);
    else
        throw std::invalid_argument(path.string() + ": unsupported image extension '" + ext + "'");
}

} // namespace hdrv
