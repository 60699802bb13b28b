#include "tabletop/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tabletop {

std::string encode_pgm(const GrayImage& image) {
  if (image.pixels.size() != image.width * image.height || image.width == 0 || image.height == 0) {
    throw ValidationError("encode_pgm: pixel buffer does not match " + std::to_string(image.width) + "x" +
                          std::to_string(image.height));
  }
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

namespace {

class HeaderReader {
public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space_and_comments();
    std::size_t start = pos_;
    std::size_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (v > 1'000'000) throw ParseError(std::string("PGM ") + what + " too large");
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("PGM header: expected ") + what);
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }
  bool at_space() const {
    return pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]));
  }

private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw ParseError("not a binary PGM (missing P5 magic)");
  HeaderReader r(bytes.substr(2));
  GrayImage img;
  img.width = r.number("width");
  img.height = r.number("height");
  const std::size_t maxval = r.number("maxval");
  if (img.width == 0 || img.height == 0) throw ParseError("PGM has zero extent");
  if (maxval == 0 || maxval > 255) throw ParseError("unsupported PGM maxval " + std::to_string(maxval));
  if (!r.at_space()) throw ParseError("PGM header: missing whitespace before raster");
  r.advance();
  const std::size_t offset = 2 + r.pos();
  const std::size_t n = img.width * img.height;
  if (bytes.size() < offset + n) {
    throw ParseError("PGM raster truncated: expected " + std::to_string(n) + " bytes, found " +
                     std::to_string(bytes.size() - offset));
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                    bytes.begin() + static_cast<std::ptrdiff_t>(offset + n));
  if (maxval != 255) {
    for (auto& p : img.pixels) {
      p = static_cast<std::uint8_t>(std::lround(std::min<double>(p, maxval) * 255.0 / static_cast<double>(maxval)));
    }
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_pgm(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  const auto bytes = encode_pgm(image);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

Tensor to_tensor(const GrayImage& image, float scale) {
  Tensor t({1, image.height, image.width});
  for (std::size_t i = 0; i < image.pixels.size(); ++i) t[i] = static_cast<float>(image.pixels[i]) * scale;
  return t;
}

GrayImage from_unit_tensor(const Tensor& t) {
  if (t.rank() != 3 || t.dim(0) != 1) throw DimensionError("expected a [1,h,w] image, got " + shape_string(t.shape()));
  GrayImage img{t.dim(2), t.dim(1), std::vector<std::uint8_t>(t.size())};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = std::clamp(static_cast<double>(t[i]), 0.0, 1.0);
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return img;
}

}  // namespace tabletop
