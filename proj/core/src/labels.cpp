#include "tabletop/labels.hpp"

#include "tabletop/errors.hpp"

namespace tabletop {

const char* to_string(ObjectKind object) noexcept {
  switch (object) {
    case ObjectKind::mug: return "mug";
    case ObjectKind::mouse: return "mouse";
    case ObjectKind::stapler: return "stapler";
  }
  return "?";
}

const char* to_string(Height height) noexcept { return height == Height::H1 ? "H1" : "H2"; }

ObjectKind parse_object(std::string_view text) {
  for (auto o : kAllObjects)
    if (text == to_string(o)) return o;
  throw ValidationError("unknown object '" + std::string(text) + "' (expected mug, mouse or stapler)");
}

Height parse_height(std::string_view text) {
  if (text == "H1") return Height::H1;
  if (text == "H2") return Height::H2;
  throw ValidationError("unknown height '" + std::string(text) + "' (expected H1 or H2)");
}

std::string angle_label(std::size_t angle_class) {
  if (angle_class >= kAngleClasses) throw ValidationError("angle class " + std::to_string(angle_class) + " out of range");
  return "A" + std::to_string(angle_class + 1);
}

std::size_t parse_angle_label(std::string_view text) {
  if (text.size() == 2 && text[0] == 'A' && text[1] >= '1' && text[1] <= '8') {
    return static_cast<std::size_t>(text[1] - '1');
  }
  throw ValidationError("unknown angle '" + std::string(text) + "' (expected A1..A8)");
}

}  // namespace tabletop
