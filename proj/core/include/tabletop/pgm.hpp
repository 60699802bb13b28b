#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tabletop/tensor.hpp"

namespace tabletop {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t& at(std::size_t y, std::size_t x) { return pixels[y * width + x]; }
  std::uint8_t at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
  bool operator==(const GrayImage&) const = default;
};

/// Binary PGM (P5). Encoding always writes maxval 255 and no comments.
/// Decoding accepts '#' comments in the header and maxval 1..255 (rescaled to 255).
std::string encode_pgm(const GrayImage& image);
GrayImage decode_pgm(std::string_view bytes);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Pixel values times `scale`, as a [1,h,w] tensor.
Tensor to_tensor(const GrayImage& image, float scale = 1.0f);
/// [1,h,w] tensor with values in [0,1] → 8-bit, rounding to nearest and clamping.
GrayImage from_unit_tensor(const Tensor& t);

}  // namespace tabletop
