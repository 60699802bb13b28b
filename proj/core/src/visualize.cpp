#include <algorithm>

#include "tabletop/models.hpp"
#include "tabletop/pgm.hpp"

namespace tabletop {

GrayImage tile_activations(const Tensor& maps) {
  if (maps.rank() != 3) throw DimensionError("activation maps must be [c,h,w], got " + shape_string(maps.shape()));
  const std::size_t c = maps.dim(0), h = maps.dim(1), w = maps.dim(2);
  const auto grid = grid_layout(c);
  GrayImage img;
  img.width = grid.columns * (w + 1) + 1;
  img.height = grid.rows * (h + 1) + 1;
  img.pixels.assign(img.width * img.height, 0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float* m = maps.data().data() + ch * h * w;
    const auto [lo, hi] = std::minmax_element(m, m + h * w);
    const float range = *hi - *lo;
    const std::size_t oy = (ch / grid.columns) * (h + 1) + 1;
    const std::size_t ox = (ch % grid.columns) * (w + 1) + 1;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        std::uint8_t v = 128;
        if (range > 0.0f) {
          const float t = (m[y * w + x] - *lo) / range;
          v = static_cast<std::uint8_t>(std::clamp(t * 255.0f + 0.5f, 0.0f, 255.0f));
        }
        img.at(oy + y, ox + x) = v;
      }
    }
  }
  return img;
}

std::vector<std::filesystem::path> visualize_activations(Network<float>& net, const Tensor& image,
                                                         const std::filesystem::path& out_dir) {
  const auto outputs = net.trace(image);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& l = net.spec().layers[i];
    if (l.kind != LayerKind::conv2d) continue;
    auto path = out_dir / (std::to_string(i) + "_" + to_string(l.kind) + ".pgm");
    write_pgm(path, tile_activations(outputs[i]));
    written.push_back(std::move(path));
  }
  return written;
}

}  // namespace tabletop
