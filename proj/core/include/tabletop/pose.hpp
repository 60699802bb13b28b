#pragma once

// Planar (SE(2)) transforms that carry a detected object to its home pose.
// Angles are counterclockwise-positive with A1 = 0° and 45° per class. The
// transform acts on (x, y, 1) column vectors in the caller's table frame.

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "tabletop/labels.hpp"
#include "tabletop/tensor.hpp"

namespace tabletop {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct HomePose {
  Point2 position;
  std::size_t angle_class = 0;
};

/// One home pose per known object.
struct HomePoseTable {
  std::map<ObjectKind, HomePose> entries;

  const HomePose& at(ObjectKind object) const;

  /// `{"mug": {"x": 10, "y": 20, "home_angle": "A1"}, ...}`; all three objects required.
  static HomePoseTable from_json(std::string_view text);
  static HomePoseTable read(const std::string& path);
};

/// 3x3 homogeneous transform, row-major.
struct PoseTransform {
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  static PoseTransform identity() { return {}; }
  Point2 apply(Point2 p) const;
  PoseTransform compose(const PoseTransform& rhs) const;  // this · rhs
  double rotation_degrees() const;

  /// "a b c d e f g h i" on one line.
  std::string to_row_major_string() const;
  /// [[a,b,c],[d,e,f],[g,h,i]]
  std::string to_json() const;

  bool operator==(const PoseTransform&) const = default;
};

/// k·45°
double angle_of(std::size_t angle_class);

/// Normalizes to (−180, 180].
double normalize_degrees(double degrees);

/// Intensity-weighted mean pixel coordinate (x = column, y = row) of a [1,h,w]
/// image. Throws ValidationError ("no object") if every pixel is zero.
Point2 centroid(const Tensor& image);

/// Rotation by θ_home − θ_pred (normalized) about `current`, then translation of
/// `current` onto the home position.
PoseTransform home_transform(ObjectKind object, std::size_t predicted_class, Point2 current, const HomePoseTable& table);

/// Same construction from explicit poses.
PoseTransform pose_transform(Point2 from, std::size_t from_class, Point2 to, std::size_t to_class);

}  // namespace tabletop
