#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "tabletop/labels.hpp"
#include "tabletop/network.hpp"

namespace tabletop {

/// conv64@3x3 → relu → pool → conv32@3x3 → relu → pool → flatten → dense300 →
/// relu → dense3. The two pooling layers are not described for the original
/// recognition model; without them the dense layer is intractably large.
NetworkSpec recognition_net(std::size_t input_h, std::size_t input_w);

/// Five conv blocks (16@5x5, then 32/64/70/80@3x3), each conv → relu → 2x2 pool,
/// then flatten → dense300 → relu → dropout(0.3) → dense8.
NetworkSpec angle_net(std::size_t input_h, std::size_t input_w);

/// Per-object angle model: angle_net named "angle-<object>".
NetworkSpec model_for(ObjectKind object, std::size_t input_h, std::size_t input_w);

/// Square-ish tile grid: ceil(sqrt(n)) columns.
struct GridLayout {
  std::size_t columns = 0, rows = 0;
};
GridLayout grid_layout(std::size_t maps);

struct GrayImage;

/// Tiles [c,h,w] activation maps row-major by channel into one 8-bit image.
/// Each map is min-max normalized to [0,255] (constant maps → 128); tiles are
/// separated and framed by 1-pixel black borders.
GrayImage tile_activations(const Tensor& maps);

/// Writes "<layer index>_<layer name>.pgm" for each conv layer of the network
/// after running `image` through it in eval mode. Returns the written paths.
std::vector<std::filesystem::path> visualize_activations(Network<float>& net, const Tensor& image,
                                                         const std::filesystem::path& out_dir);

}  // namespace tabletop
