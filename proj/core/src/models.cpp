#include "tabletop/models.hpp"

#include <cmath>

namespace tabletop {

NetworkSpec recognition_net(std::size_t input_h, std::size_t input_w) {
  if (input_h < 8 || input_w < 8) {
    throw DimensionError("recognition net needs input >= 8x8, got " + std::to_string(input_h) + "x" +
                         std::to_string(input_w));
  }
  NetworkSpec spec{"recognition", {1, input_h, input_w}, {}, kObjectClasses};
  spec.layers = {
      LayerSpec::conv2d(64, 3), LayerSpec::relu(),  LayerSpec::maxpool2(), LayerSpec::conv2d(32, 3),
      LayerSpec::relu(),        LayerSpec::maxpool2(), LayerSpec::flatten(), LayerSpec::dense(300),
      LayerSpec::relu(),        LayerSpec::dense(kObjectClasses),
  };
  spec.validate();
  return spec;
}

NetworkSpec angle_net(std::size_t input_h, std::size_t input_w) {
  if (input_h < 32 || input_w < 32) {
    throw DimensionError("angle net needs input >= 32x32 to survive five poolings, got " + std::to_string(input_h) +
                         "x" + std::to_string(input_w));
  }
  NetworkSpec spec{"angle", {1, input_h, input_w}, {}, kAngleClasses};
  spec.layers.push_back(LayerSpec::conv2d(16, 5));
  spec.layers.push_back(LayerSpec::relu());
  spec.layers.push_back(LayerSpec::maxpool2());
  for (std::size_t maps : {32, 64, 70, 80}) {
    spec.layers.push_back(LayerSpec::conv2d(maps, 3));
    spec.layers.push_back(LayerSpec::relu());
    spec.layers.push_back(LayerSpec::maxpool2());
  }
  spec.layers.push_back(LayerSpec::flatten());
  spec.layers.push_back(LayerSpec::dense(300));
  spec.layers.push_back(LayerSpec::relu());
  spec.layers.push_back(LayerSpec::dropout(0.3));
  spec.layers.push_back(LayerSpec::dense(kAngleClasses));
  spec.validate();
  return spec;
}

NetworkSpec model_for(ObjectKind object, std::size_t input_h, std::size_t input_w) {
  auto spec = angle_net(input_h, input_w);
  spec.name = std::string("angle-") + to_string(object);
  return spec;
}

GridLayout grid_layout(std::size_t maps) {
  if (maps == 0) return {};
  auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(maps))));
  // Guard against sqrt rounding for perfect squares.
  while (cols * cols < maps) ++cols;
  while (cols > 1 && (cols - 1) * (cols - 1) >= maps) --cols;
  return {cols, (maps + cols - 1) / cols};
}

}  // namespace tabletop
