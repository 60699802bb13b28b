#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabletop/labels.hpp"
#include "tabletop/tensor.hpp"
#include "tabletop/train.hpp"

namespace tabletop {

enum class Split { train, val, test };
enum class SampleSource { original, augmented, synthetic };

const char* to_string(Split split) noexcept;
Split parse_split(std::string_view text);

/// Translation in pixels; +dx moves content right, +dy moves it down.
struct Shift {
  int dx = 0;
  int dy = 0;
  bool operator==(const Shift&) const = default;
};

struct Sample {
  Tensor image;  // [1,h,w], values in [0,1]
  ObjectKind object = ObjectKind::mug;
  int instance = 1;
  Height height = Height::H1;
  std::size_t angle_class = 0;
  Shift shift;
  SampleSource source = SampleSource::original;
};

struct ManifestRow {
  std::string path;  // relative to the archive root, '/' separated
  ObjectKind object = ObjectKind::mug;
  int instance = 1;
  Height height = Height::H1;
  std::size_t angle_class = 0;
  Shift shift;
  Split split = Split::train;

  bool operator==(const ManifestRow&) const = default;
};

inline constexpr std::string_view kManifestHeader = "path,object,instance,height,angle,dx,dy,split";
inline constexpr std::string_view kManifestFile = "manifest.csv";

struct Manifest {
  std::vector<ManifestRow> rows;

  std::size_t count(Split split) const;
  void sort_by_path();
  /// Header-bearing CSV, LF line endings.
  std::string to_csv() const;
  static Manifest from_csv(std::string_view text);

  void write(const std::filesystem::path& path) const;
  static Manifest read(const std::filesystem::path& path);

  /// Checks the split protocol (H2 ⟺ test), duplicate paths, and, when `root`
  /// is given, that every file exists and decodes. Throws ValidationError.
  void validate(const std::optional<std::filesystem::path>& root = std::nullopt) const;

  bool operator==(const Manifest&) const = default;
};

/// out = (image / 255) ⊙ (mask / 255). Mask values must be exactly 0 or 255.
Tensor apply_mask(const Tensor& image, const Tensor& mask);

/// Translates content by `shift`, filling vacated pixels with 0.
Tensor shift_image(const Tensor& image, Shift shift);
/// One output per shift; throws ValidationError if |dx| >= w or |dy| >= h.
std::vector<Tensor> shift_augment(const Tensor& image, std::span<const Shift> shifts);

/// Every combination of {−10,−5,0,+5,+10} in x and y except (0,0): 24 shifts.
std::vector<Shift> default_shifts();
/// "dx:dy,dx:dy,..."; the single word "default" selects default_shifts().
std::vector<Shift> parse_shift_list(std::string_view text);

struct FilenameFields {
  ObjectKind object = ObjectKind::mug;
  int instance = 1;
  Height height = Height::H1;
  std::size_t angle_class = 0;
  std::size_t index = 0;
  bool operator==(const FilenameFields&) const = default;
};

/// Parses "<object>_<instance>_<H1|H2>_<A1..A8>_<index>.pgm" (instance 1..10).
/// Throws ParseError naming the offending component.
FilenameFields parse_filename(std::string_view name);
/// Inverse of parse_filename with a 2-digit instance and 4-digit index.
std::string format_filename(const FilenameFields& fields);

/// 2x2 box-average downsampling. Odd extents are first padded by replicating
/// the last row/column.
Tensor resize_half(const Tensor& image);

/// H2 rows become test; H1 rows are split into train/val, stratified by
/// (object, angle).
void assign_splits(Manifest& manifest, double val_fraction, std::uint64_t seed);

struct ArchiveOptions {
  std::vector<Shift> shifts = default_shifts();
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct ArchiveReport {
  Manifest manifest;
  std::vector<std::string> warnings;  // one per skipped image
};

/// Reads every "<name>.pgm" with a sibling "<name>_mask.pgm" under `input`
/// (recursively), masks it, writes the masked original plus one file per shift
/// under `output/<object>/`, and writes `output/manifest.csv`. Images without a
/// mask are skipped with a warning.
ArchiveReport build_archive(const std::filesystem::path& input, const std::filesystem::path& output,
                            const ArchiveOptions& options = {});

enum class Task { recognition, angle };
const char* to_string(Task task) noexcept;
Task parse_task(std::string_view text);

/// Loads the rows of one split as training examples. Recognition labels are the
/// object index; angle labels are the angle class, restricted to `object` if
/// given. Each image is divided by 255 and halved `halvings` times.
std::vector<Example> load_examples(const std::filesystem::path& root, const Manifest& manifest, Split split,
                                   Task task, std::optional<ObjectKind> object, std::size_t halvings);

/// Reads a PGM as a [1,h,w] tensor in [0,1], halved `halvings` times.
Tensor load_image(const std::filesystem::path& path, std::size_t halvings = 0);

}  // namespace tabletop
