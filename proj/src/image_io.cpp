#include "spw/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace spw::io {

namespace {

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::uint32_t byteswap32(std::uint32_t x) {
    return (x >> 24) | ((x >> 8) & 0xff00u) | ((x << 8) & 0xff0000u) | (x << 24);
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const RealGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + quoted(path) + " for writing");
    out << "Pf\n" << grid.width() << ' ' << grid.height() << "\n-1.0\n";
    std::vector<float> row(grid.width());
    for (int u = grid.height() - 1; u >= 0; --u) {
        for (int v = 0; v < grid.width(); ++v) {
            float f = static_cast<float>(grid(u, v));
            if constexpr (std::endian::native == std::endian::big) {
                std::uint32_t bits;
                std::memcpy(&bits, &f, 4);
                bits = byteswap32(bits);
                std::memcpy(&f, &bits, 4);
            }
            row[v] = f;
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw IoError("failed writing " + quoted(path));
}

RealGrid read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + quoted(path));
    std::string magic;
    int width = 0;
    int height = 0;
    double scale = 0.0;
    in >> magic >> width >> height >> scale;
    if (!in || (magic != "Pf" && magic != "PF"))
        throw IoError(quoted(path) + " is not a portable float map");
    if (magic == "PF") throw IoError(quoted(path) + " is a 3-channel float map; expected single-channel");
    if (width < 1 || height < 1 || scale == 0.0 || !std::isfinite(scale))
        throw IoError(quoted(path) + " has an invalid float map header");
    in.get();  // single whitespace before the payload

    const bool little = scale < 0.0;
    const bool swap = little != (std::endian::native == std::endian::little);
    RealGrid grid(Size{height, width});
    std::vector<std::uint32_t> row(width);
    for (int u = height - 1; u >= 0; --u) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
        if (!in) throw IoError(quoted(path) + " is truncated");
        for (int v = 0; v < width; ++v) {
            std::uint32_t bits = swap ? byteswap32(row[v]) : row[v];
            float f;
            std::memcpy(&f, &bits, 4);
            if (!std::isfinite(f)) throw IoError(quoted(path) + " contains a non-finite value");
            grid(u, v) = f;
        }
    }
    return grid;
}

namespace {

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

struct RawPng {
    int width = 0;
    int height = 0;
    int channels = 0;  // after palette expansion, alpha stripped
    int bit_depth = 8;
    std::vector<double> samples;  // row-major, interleaved channels
};

RawPng read_raw_png(const std::filesystem::path& path) {
    File file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open " + quoted(path));
    unsigned char signature[8] = {};
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
        throw IoError(quoted(path) + " is not a PNG image");

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (r.png == nullptr) throw IoError("libpng initialisation failed");
    r.info = png_create_info_struct(r.png);
    if (r.info == nullptr) throw IoError("libpng initialisation failed");

    RawPng raw;
    std::vector<png_bytep> rows;
    std::vector<png_byte> buffer;
    if (setjmp(png_jmpbuf(r.png))) throw IoError("corrupt PNG data in " + quoted(path));

    png_init_io(r.png, file.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    const int color = png_get_color_type(r.png, r.info);
    int depth = png_get_bit_depth(r.png, r.info);
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(r.png);
        depth = 8;
    }
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(r.png);
        depth = 8;
    }
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
    if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(r.png);
    png_read_update_info(r.png, r.info);

    raw.width = static_cast<int>(png_get_image_width(r.png, r.info));
    raw.height = static_cast<int>(png_get_image_height(r.png, r.info));
    raw.bit_depth = png_get_bit_depth(r.png, r.info);
    raw.channels = png_get_channels(r.png, r.info);
    if (raw.bit_depth != 8 && raw.bit_depth != 16)
        throw IoError(quoted(path) + " has unsupported bit depth " + std::to_string(raw.bit_depth));
    if (raw.channels != 1 && raw.channels != 3)
        throw IoError(quoted(path) + " has unsupported channel layout");

    const std::size_t stride = png_get_rowbytes(r.png, r.info);
    buffer.resize(stride * static_cast<std::size_t>(raw.height));
    rows.resize(raw.height);
    for (int u = 0; u < raw.height; ++u) rows[u] = buffer.data() + stride * u;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    const std::size_t count = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
    raw.samples.resize(count);
    for (int u = 0; u < raw.height; ++u) {
        for (std::size_t s = 0; s < static_cast<std::size_t>(raw.width) * raw.channels; ++s) {
            double value;
            if (raw.bit_depth == 16) {
                std::uint16_t x;
                std::memcpy(&x, rows[u] + 2 * s, 2);
                value = x;
            } else {
                value = rows[u][s];
            }
            raw.samples[static_cast<std::size_t>(u) * raw.width * raw.channels + s] = value;
        }
    }
    return raw;
}

}  // namespace

GrayImage read_png(const std::filesystem::path& path) {
    const RawPng raw = read_raw_png(path);
    GrayImage img{RealGrid(Size{raw.height, raw.width}), raw.bit_depth};
    for (std::size_t i = 0; i < img.pixels.area(); ++i) {
        if (raw.channels == 1) {
            img.pixels[i] = raw.samples[i];
        } else {
            const double* rgb = &raw.samples[3 * i];
            img.pixels[i] = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
        }
    }
    return img;
}

LabelGrid read_label_png(const std::filesystem::path& path) {
    const RawPng raw = read_raw_png(path);
    if (raw.channels != 1) throw IoError(quoted(path) + ": label images must be grayscale");
    LabelGrid ids(Size{raw.height, raw.width});
    for (std::size_t i = 0; i < ids.area(); ++i) ids[i] = static_cast<int>(raw.samples[i]);
    return ids;
}

void write_png(const std::filesystem::path& path, const Grid<std::uint8_t>& pixels) {
    File file(std::fopen(path.c_str(), "wb"));
    if (!file) throw IoError("cannot open " + quoted(path) + " for writing");
    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (w.png == nullptr) throw IoError("libpng initialisation failed");
    w.info = png_create_info_struct(w.png);
    if (w.info == nullptr) throw IoError("libpng initialisation failed");

    std::vector<png_bytep> rows(pixels.height());
    if (setjmp(png_jmpbuf(w.png))) throw IoError("failed writing " + quoted(path));
    png_init_io(w.png, file.get());
    png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(pixels.width()),
                 static_cast<png_uint_32>(pixels.height()), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    for (int u = 0; u < pixels.height(); ++u)
        rows[u] = const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(u) * pixels.width());
    png_set_rows(w.png, w.info, rows.data());
    png_write_png(w.png, w.info, PNG_TRANSFORM_IDENTITY, nullptr);
}

void write_label_png(const std::filesystem::path& path, const LabelGrid& ids) {
    Grid<std::uint8_t> pixels(ids.size());
    for (std::size_t i = 0; i < ids.area(); ++i) {
        if (ids[i] < 0 || ids[i] > 255) throw IoError("label id does not fit in 8 bits");
        pixels[i] = static_cast<std::uint8_t>(ids[i]);
    }
    write_png(path, pixels);
}

void write_preview_png(const std::filesystem::path& path, const RealGrid& grid) {
    const auto [lo, hi] = std::minmax_element(grid.values().begin(), grid.values().end());
    const double range = *hi - *lo;
    Grid<std::uint8_t> pixels(grid.size());
    for (std::size_t i = 0; i < grid.area(); ++i) {
        const double t = range > 0.0 ? (grid[i] - *lo) / range : 0.0;
        pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
    write_png(path, pixels);
}

}  // namespace spw::io
