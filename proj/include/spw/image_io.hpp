#pragma once

#include <cstdint>
#include <filesystem>

#include "spw/grid.hpp"

namespace spw::io {

// Single-channel portable float map ("Pf"). Written little-endian (negative
// scale), rows bottom-up, 32-bit floats. Reading accepts either byte order.
void write_pfm(const std::filesystem::path& path, const RealGrid& grid);
[[nodiscard]] RealGrid read_pfm(const std::filesystem::path& path);

struct GrayImage {
    RealGrid pixels;   // raw sample values (luminance for colour input)
    int bit_depth = 8;
    [[nodiscard]] double max_value() const { return bit_depth == 16 ? 65535.0 : 255.0; }
};

// 8/16-bit grayscale or RGB(A) PNG; colour is reduced to Rec. 601 luminance.
// Throws IoError naming the path on any read or format failure.
[[nodiscard]] GrayImage read_png(const std::filesystem::path& path);

// Integer class ids stored as grayscale pixel values. Colour labels are rejected.
[[nodiscard]] LabelGrid read_label_png(const std::filesystem::path& path);

// 8-bit grayscale PNG.
void write_png(const std::filesystem::path& path, const Grid<std::uint8_t>& pixels);
void write_label_png(const std::filesystem::path& path, const LabelGrid& ids);

// Min-max normalized 8-bit preview of a real grid (constant grids map to 0).
void write_preview_png(const std::filesystem::path& path, const RealGrid& grid);

}  // namespace spw::io
