#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ocr3d/geometry.hpp"

namespace ocr3d {

/// 8-bit image in memory; channels is 1 (gray) or 3 (rgb), interleaved row-major.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  bool operator==(const Image8&) const = default;
};

// Binary netpbm: "P5\n<w> <h>\n255\n" or "P6\n<w> <h>\n255\n" followed by raw bytes.
void write_pgm(std::ostream& out, int width, int height, std::span<const std::uint8_t> gray);
void write_ppm(std::ostream& out, int width, int height, std::span<const std::uint8_t> rgb);
void write_image(const std::filesystem::path& path, const Image8& image);

/// Reads P5 or P6 with maxval 255 (comments allowed in the header).
/// Throws std::runtime_error on malformed input.
Image8 read_netpbm(std::istream& in);
Image8 read_netpbm(const std::filesystem::path& path);

/// Mask as a gray image: 0 outside, 255 inside.
Image8 mask_to_image(const RegionMask& mask);
RegionMask image_to_mask(const Image8& gray);

}  // namespace ocr3d
