#pragma once

// Synthetic stand-in for the tabletop dataset: antialiased silhouettes on a
// black canvas, one shape family per object, 10 instances each, 8 angle
// classes at 45° steps, and two camera heights simulated by foreshortening.

#include <cstdint>
#include <filesystem>

#include "tabletop/dataset.hpp"

namespace tabletop {

struct SynthConfig {
  std::size_t instances_per_class = 10;
  std::size_t per_cell = 10;  // images per (object, angle, height)
  double noise = 0.03;        // Gaussian sigma, in [0,1] intensity units
  std::uint64_t seed = 0;
  std::size_t resolution = 64;
  double position_jitter = 2.0;  // max |offset| in pixels, uniform per sample
  double val_fraction = 0.1;

  void validate() const;
};

/// Per-instance shape parameters, in fractions of the canvas size.
struct InstanceShape {
  double length = 0.0;  // stapler bar length / mug disc radius / mouse semi-major axis
  double aspect = 1.0;  // length : width
  double feature = 0.0; // stapler notch depth / mug handle length / mouse egg asymmetry
  double intensity = 0.8;
};

InstanceShape instance_shape(ObjectKind object, int instance, std::uint64_t seed);

/// Object frame compression applied before rotation: (x, y) ↦ (x + shear·y, scale_y·y).
struct ViewGeometry {
  double scale_y = 1.0;
  double shear = 0.0;
};
ViewGeometry view_for(Height height);

/// Renders one noise-free silhouette, rotated counterclockwise (as displayed)
/// by angle_class·45° about the canvas center plus (offset_x, offset_y) pixels.
Tensor render_silhouette(ObjectKind object, const InstanceShape& shape, std::size_t angle_class, Height height,
                         std::size_t resolution, double offset_x = 0.0, double offset_y = 0.0);

/// Writes per_cell images for every (object, angle, height) cell as
/// "<object>/<object>_<inst>_<H>_<A>_<index>.pgm" plus manifest.csv under
/// `out_dir`, and returns the manifest. Deterministic in the config.
Manifest synth_generate(const SynthConfig& config, const std::filesystem::path& out_dir);

/// Same samples without touching the filesystem (no PGM quantization).
std::vector<Sample> synth_samples(const SynthConfig& config, std::optional<ObjectKind> object = std::nullopt,
                                  std::optional<Height> height = std::nullopt);

}  // namespace tabletop
