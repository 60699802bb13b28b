#include "tabletop/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tabletop/pgm.hpp"

namespace tabletop {

namespace {

constexpr std::size_t kSupersample = 4;

struct CosSin {
  double c, s;
};

// Exact values for multiples of 45° so that quarter-turn renders are exact
// rotations of each other.
CosSin rotation_for(std::size_t angle_class) {
  constexpr double r = 0.70710678118654752440;
  static constexpr std::array<CosSin, 8> table{
      CosSin{1, 0}, CosSin{r, r}, CosSin{0, 1}, CosSin{-r, r}, CosSin{-1, 0}, CosSin{-r, -r}, CosSin{0, -1}, CosSin{r, -r}};
  return table.at(angle_class);
}

bool inside_stapler(const InstanceShape& s, double x, double y) {
  const double a = s.length / 2.0;
  const double b = s.length / s.aspect / 2.0;
  const double rc = 0.8 * b;
  const double qx = std::abs(x) - (a - rc);
  const double qy = std::abs(y) - (b - rc);
  const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
  if (outside + std::min(std::max(qx, qy), 0.0) > rc) return false;
  // Notch bitten out of the +y edge on the +x half.
  const bool in_notch = x > 0.3 * a && x < 0.7 * a && y > b - s.feature * 2.0 * b;
  return !in_notch;
}

bool inside_mug(const InstanceShape& s, double x, double y) {
  const double cx = -0.05;
  const double r = s.length;
  if ((x - cx) * (x - cx) + y * y <= r * r) return true;
  // Handle stub protruding along +x.
  return x >= cx + r - 0.02 && x <= cx + r + s.feature && std::abs(y) <= 0.05;
}

bool inside_mouse(const InstanceShape& s, double x, double y) {
  const double a = s.length;
  const double b = a / s.aspect * (1.0 + s.feature * x / a);
  if (b <= 0.0) return false;
  return (x / a) * (x / a) + (y / b) * (y / b) <= 1.0;
}

std::uint64_t sample_stream(ObjectKind object, std::size_t angle, Height height, std::size_t index) {
  const std::uint64_t cell =
      (static_cast<std::uint64_t>(object) * kAngleClasses + angle) * 2 + (height == Height::H1 ? 0 : 1);
  return cell * 1'000'000ULL + index;
}

Sample make_sample(const SynthConfig& cfg, ObjectKind object, std::size_t angle, Height height, std::size_t index) {
  Rng rng(Rng::derive(cfg.seed, sample_stream(object, angle, height, index)));
  const int instance = static_cast<int>(index % cfg.instances_per_class) + 1;
  const auto shape = instance_shape(object, instance, cfg.seed);
  const double ox = rng.uniform(-cfg.position_jitter, cfg.position_jitter);
  const double oy = rng.uniform(-cfg.position_jitter, cfg.position_jitter);
  auto img = render_silhouette(object, shape, angle, height, cfg.resolution, ox, oy);
  if (cfg.noise > 0.0) {
    for (auto& v : img.data()) v = static_cast<float>(std::clamp(v + cfg.noise * rng.normal(), 0.0, 1.0));
  }
  return {std::move(img), object, instance, height, angle, {}, SampleSource::synthetic};
}

}  // namespace

void SynthConfig::validate() const {
  if (resolution < 32) throw ValidationError("resolution must be >= 32, got " + std::to_string(resolution));
  if (per_cell < 1) throw ValidationError("per_cell must be >= 1");
  if (instances_per_class < 1 || instances_per_class > 10) throw ValidationError("instances_per_class must be in 1..10");
  if (!(noise >= 0.0)) throw ValidationError("noise must be >= 0");
  if (!(position_jitter >= 0.0) || position_jitter > static_cast<double>(resolution) / 8.0) {
    throw ValidationError("position_jitter must be in [0, resolution/8]");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ValidationError("val_fraction must be in (0,1)");
}

InstanceShape instance_shape(ObjectKind object, int instance, std::uint64_t seed) {
  Rng rng(Rng::derive(seed ^ 0x5A17'0B1EULL, static_cast<std::uint64_t>(object) * 64 + static_cast<std::uint64_t>(instance)));
  InstanceShape s;
  s.intensity = rng.uniform(0.55, 0.95);
  switch (object) {
    case ObjectKind::stapler:
      s.length = rng.uniform(0.56, 0.66);
      s.aspect = rng.uniform(4.5, 5.5);
      s.feature = rng.uniform(0.35, 0.5);
      break;
    case ObjectKind::mug:
      s.length = rng.uniform(0.28, 0.31);
      s.aspect = 1.0;
      s.feature = rng.uniform(0.1, 0.14);
      break;
    case ObjectKind::mouse:
      s.length = rng.uniform(0.16, 0.19);
      s.aspect = rng.uniform(1.35, 1.45);
      // Instance 1 is exactly point-symmetric; the rest are faintly egg-shaped.
      s.feature = instance == 1 ? 0.0 : rng.uniform(0.0, 0.04);
      break;
  }
  return s;
}

ViewGeometry view_for(Height height) {
  return height == Height::H1 ? ViewGeometry{0.9, 0.03} : ViewGeometry{0.6, 0.12};
}

Tensor render_silhouette(ObjectKind object, const InstanceShape& shape, std::size_t angle_class, Height height,
                         std::size_t resolution, double offset_x, double offset_y) {
  if (resolution < 2) throw ValidationError("resolution too small");
  const auto [c, s] = rotation_for(angle_class);
  const auto view = view_for(height);
  const double res = static_cast<double>(resolution);
  const double cx = res / 2.0 + offset_x;
  const double cy = res / 2.0 + offset_y;
  const auto inside = [&](double x, double y) {
    switch (object) {
      case ObjectKind::stapler: return inside_stapler(shape, x, y);
      case ObjectKind::mug: return inside_mug(shape, x, y);
      case ObjectKind::mouse: return inside_mouse(shape, x, y);
    }
    return false;
  };

  Tensor img({1, resolution, resolution});
  constexpr double step = 1.0 / kSupersample;
  for (std::size_t row = 0; row < resolution; ++row) {
    for (std::size_t col = 0; col < resolution; ++col) {
      std::size_t hits = 0;
      for (std::size_t a = 0; a < kSupersample; ++a) {
        for (std::size_t b = 0; b < kSupersample; ++b) {
          // Canvas coordinates with y pointing up.
          const double px = static_cast<double>(col) + (static_cast<double>(a) + 0.5) * step - cx;
          const double py = cy - (static_cast<double>(row) + (static_cast<double>(b) + 0.5) * step);
          const double ux = px * c + py * s;
          const double uy = -px * s + py * c;
          const double ly = uy / view.scale_y;
          const double lx = ux - view.shear * ly;
          if (inside(lx / res, ly / res)) ++hits;
        }
      }
      img[row * resolution + col] =
          static_cast<float>(shape.intensity * static_cast<double>(hits) / (kSupersample * kSupersample));
    }
  }
  return img;
}

std::vector<Sample> synth_samples(const SynthConfig& config, std::optional<ObjectKind> object,
                                  std::optional<Height> height) {
  config.validate();
  std::vector<Sample> out;
  for (auto o : kAllObjects) {
    if (object && o != *object) continue;
    for (std::size_t angle = 0; angle < kAngleClasses; ++angle)
      for (auto h : {Height::H1, Height::H2}) {
        if (height && h != *height) continue;
        for (std::size_t i = 0; i < config.per_cell; ++i) out.push_back(make_sample(config, o, angle, h, i));
      }
  }
  return out;
}

Manifest synth_generate(const SynthConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  Manifest m;
  for (auto o : kAllObjects) {
    for (std::size_t angle = 0; angle < kAngleClasses; ++angle) {
      for (auto h : {Height::H1, Height::H2}) {
        for (std::size_t i = 0; i < config.per_cell; ++i) {
          const auto sample = make_sample(config, o, angle, h, i);
          const std::string rel =
              std::string(to_string(o)) + "/" + format_filename({o, sample.instance, h, angle, i});
          write_pgm(out_dir / rel, from_unit_tensor(sample.image));
          m.rows.push_back({rel, o, sample.instance, h, angle, {}, Split::train});
        }
      }
    }
  }
  assign_splits(m, config.val_fraction, config.seed);
  m.sort_by_path();
  m.validate();
  m.write(out_dir / std::string(kManifestFile));
  return m;
}

}  // namespace tabletop
