#include "tabletop/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "tabletop/pgm.hpp"

namespace tabletop {

namespace fs = std::filesystem;

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  throw ValidationError("unknown split '" + std::string(text) + "'");
}

const char* to_string(Task task) noexcept { return task == Task::recognition ? "recognition" : "angle"; }

Task parse_task(std::string_view text) {
  if (text == "recognition") return Task::recognition;
  if (text == "angle") return Task::angle;
  throw ValidationError("unknown task '" + std::string(text) + "' (expected recognition or angle)");
}

namespace {

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void require_image(const Tensor& t, const char* what) {
  if (t.rank() != 3 || t.dim(0) != 1) {
    throw DimensionError(std::string(what) + ": expected a [1,h,w] image, got " + shape_string(t.shape()));
  }
}

std::string shift_suffix(Shift s) {
  const auto sign = [](int v) { return (v < 0 ? "-" : "+") + std::to_string(v < 0 ? -v : v); };
  return "_dx" + sign(s.dx) + "_dy" + sign(s.dy);
}

}  // namespace

// ---------------------------------------------------------------- manifest

std::size_t Manifest::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](const auto& r) { return r.split == split; }));
}

void Manifest::sort_by_path() {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
}

std::string Manifest::to_csv() const {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& r : rows) {
    if (r.path.find_first_of(",\n\"") != std::string::npos) {
      throw ValidationError("manifest path may not contain commas, quotes or newlines: " + r.path);
    }
    out += r.path + ',' + to_string(r.object) + ',' + std::to_string(r.instance) + ',' + to_string(r.height) + ',' +
           angle_label(r.angle_class) + ',' + std::to_string(r.shift.dx) + ',' + std::to_string(r.shift.dy) + ',' +
           to_string(r.split) + '\n';
  }
  return out;
}

Manifest Manifest::from_csv(std::string_view text) {
  Manifest m;
  const auto lines = split_on(text, '\n');
  if (lines.empty() || lines[0] != kManifestHeader) {
    throw ParseError("manifest header must be '" + std::string(kManifestHeader) + "'");
  }
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto line = lines[ln];
    if (line.empty()) continue;
    const auto f = split_on(line, ',');
    const auto where = "manifest line " + std::to_string(ln + 1);
    if (f.size() != 8) throw ParseError(where + ": expected 8 fields, got " + std::to_string(f.size()));
    ManifestRow r;
    try {
      r.path = std::string(f[0]);
      r.object = parse_object(f[1]);
      if (!parse_int(f[2], r.instance)) throw ParseError("bad instance '" + std::string(f[2]) + "'");
      r.height = parse_height(f[3]);
      r.angle_class = parse_angle_label(f[4]);
      if (!parse_int(f[5], r.shift.dx)) throw ParseError("bad dx '" + std::string(f[5]) + "'");
      if (!parse_int(f[6], r.shift.dy)) throw ParseError("bad dy '" + std::string(f[6]) + "'");
      r.split = parse_split(f[7]);
    } catch (const Error& e) {
      throw ParseError(where + ": " + e.what());
    }
    m.rows.push_back(std::move(r));
  }
  return m;
}

void Manifest::write(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_csv();
}

Manifest Manifest::read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str());
}

void Manifest::validate(const std::optional<fs::path>& root) const {
  std::set<std::string> seen;
  for (const auto& r : rows) {
    if (!seen.insert(r.path).second) throw ValidationError("duplicate manifest path " + r.path);
    if ((r.height == Height::H2) != (r.split == Split::test)) {
      throw ValidationError("split protocol violated for " + r.path + ": height " + to_string(r.height) +
                            " with split " + to_string(r.split));
    }
    if (root) {
      const auto p = *root / r.path;
      if (!fs::exists(p)) throw ValidationError("manifest references missing file " + p.string());
      try {
        (void)read_pgm(p);
      } catch (const ParseError& e) {
        throw ValidationError(e.what());
      }
    }
  }
}

// ---------------------------------------------------------------- image ops

Tensor apply_mask(const Tensor& image, const Tensor& mask) {
  require_image(image, "apply_mask");
  if (image.shape() != mask.shape()) {
    throw DimensionError("apply_mask: image " + shape_string(image.shape()) + " vs mask " + shape_string(mask.shape()));
  }
  Tensor out(image.shape());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const float m = mask[i];
    if (m != 0.0f && m != 255.0f) {
      throw ValidationError("mask value " + std::to_string(m) + " at index " + std::to_string(i) +
                            " is neither 0 nor 255");
    }
    out[i] = (image[i] / 255.0f) * (m / 255.0f);
  }
  return out;
}

Tensor shift_image(const Tensor& image, Shift s) {
  require_image(image, "shift_image");
  const long h = static_cast<long>(image.dim(1)), w = static_cast<long>(image.dim(2));
  if (std::abs(s.dx) >= w || std::abs(s.dy) >= h) {
    throw ValidationError("shift (" + std::to_string(s.dx) + "," + std::to_string(s.dy) + ") out of bounds for " +
                          std::to_string(w) + "x" + std::to_string(h) + " image");
  }
  Tensor out(image.shape());
  for (long y = 0; y < h; ++y) {
    const long sy = y - s.dy;
    if (sy < 0 || sy >= h) continue;
    for (long x = 0; x < w; ++x) {
      const long sx = x - s.dx;
      if (sx < 0 || sx >= w) continue;
      out[static_cast<std::size_t>(y * w + x)] = image[static_cast<std::size_t>(sy * w + sx)];
    }
  }
  return out;
}

std::vector<Tensor> shift_augment(const Tensor& image, std::span<const Shift> shifts) {
  std::vector<Tensor> out;
  out.reserve(shifts.size());
  for (const auto& s : shifts) out.push_back(shift_image(image, s));
  return out;
}

std::vector<Shift> default_shifts() {
  std::vector<Shift> out;
  for (int dy : {-10, -5, 0, 5, 10})
    for (int dx : {-10, -5, 0, 5, 10})
      if (dx != 0 || dy != 0) out.push_back({dx, dy});
  return out;
}

std::vector<Shift> parse_shift_list(std::string_view text) {
  if (text == "default") return default_shifts();
  std::vector<Shift> out;
  if (text.empty() || text == "none") return out;
  for (auto item : split_on(text, ',')) {
    const auto colon = item.find(':');
    Shift s;
    if (colon == std::string_view::npos || !parse_int(item.substr(0, colon), s.dx) ||
        !parse_int(item.substr(colon + 1), s.dy)) {
      throw ValidationError("bad shift '" + std::string(item) + "' (expected dx:dy)");
    }
    out.push_back(s);
  }
  return out;
}

FilenameFields parse_filename(std::string_view name) {
  const auto fail = [&](const char* field, std::string_view value) {
    return ParseError("filename '" + std::string(name) + "': bad " + field + " field '" + std::string(value) + "'");
  };
  constexpr std::string_view ext = ".pgm";
  if (name.size() <= ext.size() || name.substr(name.size() - ext.size()) != ext) throw fail("extension", name);
  const auto parts = split_on(name.substr(0, name.size() - ext.size()), '_');
  if (parts.size() != 5) {
    throw ParseError("filename '" + std::string(name) + "': expected <object>_<instance>_<height>_<angle>_<index>.pgm");
  }
  FilenameFields f;
  try {
    f.object = parse_object(parts[0]);
  } catch (const ValidationError&) {
    throw fail("object", parts[0]);
  }
  if (!all_digits(parts[1]) || !parse_int(parts[1], f.instance) || f.instance < 1 || f.instance > 10) {
    throw fail("instance", parts[1]);
  }
  try {
    f.height = parse_height(parts[2]);
  } catch (const ValidationError&) {
    throw fail("height", parts[2]);
  }
  try {
    f.angle_class = parse_angle_label(parts[3]);
  } catch (const ValidationError&) {
    throw fail("angle", parts[3]);
  }
  if (!all_digits(parts[4]) || !parse_int(parts[4], f.index)) throw fail("index", parts[4]);
  return f;
}

std::string format_filename(const FilenameFields& f) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02d_%s_%s_%04zu.pgm", to_string(f.object), f.instance, to_string(f.height),
                angle_label(f.angle_class).c_str(), f.index);
  return buf;
}

Tensor resize_half(const Tensor& image) {
  require_image(image, "resize_half");
  const std::size_t h = image.dim(1), w = image.dim(2);
  if (h < 2 || w < 2) throw DimensionError("resize_half: image too small " + shape_string(image.shape()));
  const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  // Replicate the last row/column when an extent is odd.
  const auto px = [&](std::size_t y, std::size_t x) { return image[std::min(y, h - 1) * w + std::min(x, w - 1)]; };
  Tensor out({1, oh, ow});
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x)
      out[y * ow + x] =
          (px(2 * y, 2 * x) + px(2 * y, 2 * x + 1) + px(2 * y + 1, 2 * x) + px(2 * y + 1, 2 * x + 1)) * 0.25f;
  return out;
}

// ---------------------------------------------------------------- archive

void assign_splits(Manifest& manifest, double val_fraction, std::uint64_t seed) {
  std::vector<std::size_t> h1_rows, strata;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    auto& r = manifest.rows[i];
    if (r.height == Height::H2) {
      r.split = Split::test;
    } else {
      h1_rows.push_back(i);
      strata.push_back(static_cast<std::size_t>(r.object) * kAngleClasses + r.angle_class);
    }
  }
  if (h1_rows.empty()) return;
  const auto split = split_train_val(strata, val_fraction, seed);
  for (auto k : split.train) manifest.rows[h1_rows[k]].split = Split::train;
  for (auto k : split.val) manifest.rows[h1_rows[k]].split = Split::val;
}

ArchiveReport build_archive(const fs::path& input, const fs::path& output, const ArchiveOptions& options) {
  if (!fs::is_directory(input)) throw ValidationError("input directory " + input.string() + " does not exist");
  std::vector<fs::path> images;
  for (const auto& entry : fs::recursive_directory_iterator(input)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    const auto stem = entry.path().stem().string();
    if (stem.size() > 5 && stem.ends_with("_mask")) continue;
    images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());

  ArchiveReport report;
  for (const auto& path : images) {
    const auto mask_path = path.parent_path() / (path.stem().string() + "_mask.pgm");
    if (!fs::exists(mask_path)) {
      report.warnings.push_back("skipping " + path.string() + ": no mask " + mask_path.filename().string());
      continue;
    }
    FilenameFields fields;
    try {
      fields = parse_filename(path.filename().string());
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    const auto image = to_tensor(read_pgm(path));
    const auto mask = to_tensor(read_pgm(mask_path));
    Tensor masked;
    try {
      masked = apply_mask(image, mask);
    } catch (const Error& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }

    const std::string rel_dir = to_string(fields.object);
    const std::string stem = path.stem().string();
    const auto emit = [&](const Tensor& t, Shift s, const std::string& file) {
      const std::string rel = rel_dir + "/" + file;
      write_pgm(output / rel, from_unit_tensor(t));
      report.manifest.rows.push_back(
          {rel, fields.object, fields.instance, fields.height, fields.angle_class, s, Split::train});
    };
    emit(masked, {}, stem + ".pgm");
    const auto shifted = shift_augment(masked, options.shifts);
    for (std::size_t k = 0; k < shifted.size(); ++k) {
      emit(shifted[k], options.shifts[k], stem + shift_suffix(options.shifts[k]) + ".pgm");
    }
  }
  assign_splits(report.manifest, options.val_fraction, options.seed);
  report.manifest.sort_by_path();
  report.manifest.validate();
  report.manifest.write(output / std::string(kManifestFile));
  return report;
}

Tensor load_image(const fs::path& path, std::size_t halvings) {
  auto t = to_tensor(read_pgm(path), 1.0f / 255.0f);
  for (std::size_t i = 0; i < halvings; ++i) t = resize_half(t);
  return t;
}

std::vector<Example> load_examples(const fs::path& root, const Manifest& manifest, Split split, Task task,
                                   std::optional<ObjectKind> object, std::size_t halvings) {
  std::vector<Example> out;
  for (const auto& r : manifest.rows) {
    if (r.split != split) continue;
    if (object && r.object != *object) continue;
    const std::size_t label = task == Task::recognition ? static_cast<std::size_t>(r.object) : r.angle_class;
    out.push_back({load_image(root / r.path, halvings), label});
  }
  return out;
}

}  // namespace tabletop
