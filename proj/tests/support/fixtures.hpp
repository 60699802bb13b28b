#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tabletop/dataset.hpp"
#include "tabletop/pgm.hpp"
#include "tabletop/rng.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Fresh empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tabletop_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Writes `count` raw 32x32 images with random content and a centered square
/// 0/255 mask each. Names cycle through objects, heights and angles so that
/// every H1 (object, angle) stratum that appears has several rows.
inline std::vector<fs::path> write_raw_images(const fs::path& dir, std::size_t count, std::uint64_t seed) {
  using namespace tabletop;
  Rng rng(seed);
  std::vector<fs::path> written;
  for (std::size_t i = 0; i < count; ++i) {
    FilenameFields f;
    f.object = kAllObjects[i % 3];
    f.instance = 1 + static_cast<int>(i % 10);
    f.height = (i / 3) % 2 == 0 ? Height::H1 : Height::H2;
    f.angle_class = (i / 6) % kAngleClasses;
    f.index = i;
    GrayImage img{32, 32, std::vector<std::uint8_t>(32 * 32)};
    GrayImage mask{32, 32, std::vector<std::uint8_t>(32 * 32, 0)};
    for (std::size_t y = 0; y < 32; ++y)
      for (std::size_t x = 0; x < 32; ++x) {
        img.at(y, x) = static_cast<std::uint8_t>(1 + rng.below(255));
        if (y >= 8 && y < 24 && x >= 8 && x < 24) mask.at(y, x) = 255;
      }
    const auto name = format_filename(f);
    write_pgm(dir / name, img);
    write_pgm(dir / (name.substr(0, name.size() - 4) + "_mask.pgm"), mask);
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace fixtures
