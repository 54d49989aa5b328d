#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include "roadprop/grid.hpp"

namespace roadprop {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 8-bit RGB PNG. Palette images are expanded and alpha is dropped on read.
RasterImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const RasterImage& img);

// 8-bit grayscale PNG, 0 = background, 255 = foreground. Any other pixel
// value is a read error.
BinaryMask read_binary_mask(const std::filesystem::path& path);
void write_binary_mask(const std::filesystem::path& path, const BinaryMask& mask);

// 8-bit grayscale PNG, 0 = NonRoad, 128 = Unknown, 255 = Road. Any other
// pixel value is a read error.
TriStateMask read_tristate_mask(const std::filesystem::path& path);
void write_tristate_mask(const std::filesystem::path& path, const TriStateMask& mask);

// 16-bit grayscale PNG, label = pixel value.
Grid<std::uint16_t> read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const Grid<std::uint16_t>& labels);

// Raw float maps: magic "F32M", then height and width as unsigned 32-bit
// little-endian, then height*width little-endian IEEE-754 floats
// row-major. Writing a non-finite value is an error.
FloatField read_f32(const std::filesystem::path& path);
void write_f32(const std::filesystem::path& path, const FloatField& field);

}  // namespace roadprop
