#include "tabletop/pose.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <fstream>
#include <sstream>

namespace tabletop {

const HomePose& HomePoseTable::at(ObjectKind object) const {
  const auto it = entries.find(object);
  if (it == entries.end()) throw ValidationError(std::string("no home pose for ") + to_string(object));
  return it->second;
}

HomePoseTable HomePoseTable::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("home table: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("home table must be a JSON object");
  HomePoseTable t;
  for (const auto& [key, value] : j.items()) {
    const auto object = parse_object(key);
    try {
      HomePose p;
      p.position = {value.at("x").get<double>(), value.at("y").get<double>()};
      p.angle_class = parse_angle_label(value.at("home_angle").get<std::string>());
      t.entries[object] = p;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("home table entry '" + key + "': " + e.what());
    }
  }
  for (auto o : kAllObjects) {
    if (!t.entries.contains(o)) throw ValidationError(std::string("home table is missing ") + to_string(o));
  }
  return t;
}

HomePoseTable HomePoseTable::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open home table " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

Point2 PoseTransform::apply(Point2 p) const {
  return {m[0][0] * p.x + m[0][1] * p.y + m[0][2], m[1][0] * p.x + m[1][1] * p.y + m[1][2]};
}

PoseTransform PoseTransform::compose(const PoseTransform& rhs) const {
  PoseTransform out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[i][k] * rhs.m[k][j];
      out.m[i][j] = s;
    }
  return out;
}

double PoseTransform::rotation_degrees() const { return std::atan2(m[1][0], m[0][0]) * 180.0 / std::numbers::pi; }

std::string PoseTransform::to_row_major_string() const {
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) os << (i || j ? " " : "") << (m[i][j] == 0.0 ? 0.0 : m[i][j]);
  return os.str();
}

std::string PoseTransform::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : m) {
    nlohmann::json r = nlohmann::json::array();
    for (double v : row) r.push_back(v == 0.0 ? 0.0 : v);
    j.push_back(r);
  }
  return j.dump();
}

double angle_of(std::size_t angle_class) {
  if (angle_class >= kAngleClasses) throw ValidationError("angle class " + std::to_string(angle_class) + " out of range");
  return 45.0 * static_cast<double>(angle_class);
}

double normalize_degrees(double degrees) {
  double d = std::fmod(degrees, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

Point2 centroid(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 1) {
    throw DimensionError("centroid expects a [1,h,w] image, got " + shape_string(image.shape()));
  }
  const std::size_t h = image.dim(1), w = image.dim(2);
  double total = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double v = image[y * w + x];
      total += v;
      sx += v * static_cast<double>(x);
      sy += v * static_cast<double>(y);
    }
  if (!(total > 0.0)) throw ValidationError("no object: image has no nonzero pixels");
  return {sx / total, sy / total};
}

PoseTransform pose_transform(Point2 from, std::size_t from_class, Point2 to, std::size_t to_class) {
  const auto steps = static_cast<long>(to_class) - static_cast<long>(from_class);
  const double delta = normalize_degrees(45.0 * static_cast<double>(steps));
  // Exact trig for the 45° lattice so quarter turns and the identity come out exact.
  constexpr double r = 0.70710678118654752440;
  double c = 0.0, s = 0.0;
  switch (static_cast<int>(std::lround(delta / 45.0))) {
    case 0: c = 1; s = 0; break;
    case 1: c = r; s = r; break;
    case 2: c = 0; s = 1; break;
    case 3: c = -r; s = r; break;
    case 4: c = -1; s = 0; break;
    case -1: c = r; s = -r; break;
    case -2: c = 0; s = -1; break;
    case -3: c = -r; s = -r; break;
  }
  PoseTransform t;
  t.m = {{{c, -s, to.x - (c * from.x - s * from.y)}, {s, c, to.y - (s * from.x + c * from.y)}, {0, 0, 1}}};
  return t;
}

PoseTransform home_transform(ObjectKind object, std::size_t predicted_class, Point2 current,
                             const HomePoseTable& table) {
  if (predicted_class >= kAngleClasses) {
    throw ValidationError("angle class " + std::to_string(predicted_class) + " out of range");
  }
  const auto& home = table.at(object);
  return pose_transform(current, predicted_class, home.position, home.angle_class);
}

}  // namespace tabletop
