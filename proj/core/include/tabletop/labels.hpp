#pragma once

#include <array>
#include <string>
#include <string_view>

namespace tabletop {

/// Recognition class indices follow declaration order.
enum class ObjectKind { mug = 0, mouse = 1, stapler = 2 };
enum class Height { H1, H2 };

inline constexpr std::array<ObjectKind, 3> kAllObjects{ObjectKind::mug, ObjectKind::mouse, ObjectKind::stapler};
inline constexpr std::size_t kObjectClasses = 3;
inline constexpr std::size_t kAngleClasses = 8;

const char* to_string(ObjectKind object) noexcept;
const char* to_string(Height height) noexcept;
/// Throws ValidationError for anything but mug/mouse/stapler.
ObjectKind parse_object(std::string_view text);
Height parse_height(std::string_view text);

/// "A1".."A8" <-> 0..7
std::string angle_label(std::size_t angle_class);
std::size_t parse_angle_label(std::string_view text);

}  // namespace tabletop
