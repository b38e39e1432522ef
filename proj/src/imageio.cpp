#include "ocr3d/imageio.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ocr3d {

namespace {

void write_netpbm(std::ostream& out, const char* magic, int width, int height,
                  std::span<const std::uint8_t> bytes, std::size_t channels) {
  if (bytes.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels)
    throw std::invalid_argument("netpbm: pixel buffer size does not match dimensions");
  out << magic << '\n' << width << ' ' << height << '\n' << 255 << '\n';
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (tok.empty()) throw std::runtime_error("netpbm: truncated header");
  return tok;
}

int parse_dim(const std::string& tok) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("netpbm: bad header value '" + tok + "'");
  }
  if (used != tok.size() || v <= 0) throw std::runtime_error("netpbm: bad header value '" + tok + "'");
  return v;
}

}  // namespace

void write_pgm(std::ostream& out, int width, int height, std::span<const std::uint8_t> gray) {
  write_netpbm(out, "P5", width, height, gray, 1);
}

void write_ppm(std::ostream& out, int width, int height, std::span<const std::uint8_t> rgb) {
  write_netpbm(out, "P6", width, height, rgb, 3);
}

void write_image(const std::filesystem::path& path, const Image8& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (image.channels == 3)
    write_ppm(out, image.width, image.height, image.data);
  else
    write_pgm(out, image.width, image.height, image.data);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Image8 read_netpbm(std::istream& in) {
  const std::string magic = header_token(in);
  Image8 img;
  if (magic == "P5")
    img.channels = 1;
  else if (magic == "P6")
    img.channels = 3;
  else
    throw std::runtime_error("netpbm: unsupported magic '" + magic + "'");
  img.width = parse_dim(header_token(in));
  img.height = parse_dim(header_token(in));
  if (parse_dim(header_token(in)) != 255) throw std::runtime_error("netpbm: only maxval 255 is supported");
  // header_token consumed exactly one whitespace byte after maxval
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw std::runtime_error("netpbm: truncated pixel data");
  return img;
}

Image8 read_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_netpbm(in);
}

Image8 mask_to_image(const RegionMask& mask) {
  Image8 img{mask.width(), mask.height(), 1, {}};
  img.data.reserve(mask.bits().size());
  for (auto b : mask.bits()) img.data.push_back(b ? 255 : 0);
  return img;
}

RegionMask image_to_mask(const Image8& gray) {
  if (gray.channels != 1) throw std::invalid_argument("image_to_mask: expected a gray image");
  RegionMask mask(gray.width, gray.height);
  for (int y = 0; y < gray.height; ++y)
    for (int x = 0; x < gray.width; ++x)
      if (gray.data[static_cast<std::size_t>(y) * gray.width + x] != 0) mask.set(x, y);
  return mask;
}

}  // namespace ocr3d
