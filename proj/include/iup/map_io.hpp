#pragma once

// Analysis-map bundles and scene files.
//
// A bundle directory holds, per map (visibility, contrast, phase, dc):
//   <name>.f32   raw little-endian float32, row-major, width*height samples
//   <name>.hdr   key/value sidecar: dimensions, dtype, units, preview scale
//   <name>.pgm   optional 16-bit preview
// plus mask.u8 (one byte per pixel, fringe::MaskBits) and bundle.txt
// (provenance: options, fringe frequency, toolkit version).
//
// A scene directory holds scene.txt with amplitude.f64 and phase.f64 (raw
// little-endian float64).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "iup/errors.hpp"
#include "iup/fringe_analysis.hpp"
#include "iup/interferometer.hpp"
#include "iup/io_util.hpp"
#include "iup/keyvalue.hpp"
#include "iup/stack_io.hpp"

namespace iup::io {

inline constexpr int kBundleFormatVersion = 1;

// Preview sample for a value mapped linearly from [lo, hi] onto [0, 65535].
inline std::uint16_t preview_sample(double value, double lo, double hi) {
  if (!std::isfinite(value)) return 0;
  const double t = std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(t * 65535.0));
}

struct MapSpec {
  const char* name;
  const char* units;
  const ImageD* map;
  double lo, hi;  // preview range
};

inline Bytes encode_f32_map(const ImageD& map) {
  Bytes out;
  out.reserve(map.size() * 4);
  for (double v : map.data()) append_f32_le(out, static_cast<float>(v));
  return out;
}

// Writes the bundle; returns every committed path.
inline std::vector<fs::path> export_maps(const fringe::AnalysisResult& result, const fs::path& directory,
                                         bool preview, const fringe::ExtractionOptions& options = {}) {
  const auto peak = [](const ImageD& m) {
    double p = 0.0;
    for (double v : m.data())
      if (std::isfinite(v)) p = std::max(p, v);
    return p > 0.0 ? p : 1.0;
  };
  const MapSpec specs[] = {
      {"visibility", "dimensionless", &result.visibility, 0.0, 1.0},
      {"contrast", "counts", &result.contrast, 0.0, peak(result.contrast)},
      {"phase", "radians", &result.phase, -std::numbers::pi, std::numbers::pi},
      {"dc", "counts", &result.dc, 0.0, peak(result.dc)},
  };

  StagedWriter writer(directory);
  for (const auto& spec : specs) {
    const ImageD& map = *spec.map;
    writer.stage(std::string(spec.name) + ".f32", encode_f32_map(map));
    KeyValueDoc hdr;
    hdr.set("name", spec.name);
    hdr.set("width", map.width());
    hdr.set("height", map.height());
    hdr.set("dtype", "float32-le");
    hdr.set("units", spec.units);
    hdr.set("scale", 1.0);
    if (preview) {
      PgmImage img{map.width(), map.height(), 65535, {}};
      img.samples.resize(map.size());
      for (std::size_t i = 0; i < map.size(); ++i) img.samples[i] = preview_sample(map[i], spec.lo, spec.hi);
      writer.stage(std::string(spec.name) + ".pgm", encode_pgm16(img));
      hdr.set("preview_min", spec.lo);
      hdr.set("preview_max", spec.hi);
      hdr.set("preview_scale", 65535.0 / (spec.hi - spec.lo));
    }
    writer.stage(std::string(spec.name) + ".hdr", to_bytes(hdr.serialize()));
  }

  writer.stage("mask.u8", Bytes(result.mask.data().begin(), result.mask.data().end()));

  KeyValueDoc bundle;
  bundle.set("format_version", kBundleFormatVersion);
  bundle.set("toolkit_version", kToolkitVersion);
  bundle.set("width", result.visibility.width());
  bundle.set("height", result.visibility.height());
  bundle.set("frame_count", result.frame_count);
  bundle.set("fringe_frequency", result.fringe_frequency);
  bundle.set("leakage_fraction", result.leakage_fraction);
  bundle.set("leakage_flag", result.leakage_flag ? "true" : "false");
  bundle.set("frequency_mode", fringe::to_string(options.frequency_mode));
  bundle.set("zero_pad_factor", static_cast<std::int64_t>(options.zero_pad_factor));
  bundle.set("min_dc_threshold", options.min_dc_threshold);
  bundle.set("maps", "visibility, contrast, phase, dc");
  bundle.set("mask", "mask.u8 (bit 0: visibility undefined, bit 1: phase undefined)");
  writer.stage("bundle.txt", to_bytes(bundle.serialize()));
  return writer.commit();
}

// Reads <directory>/<name>.f32 using its .hdr sidecar.
inline ImageD read_f32_map(const fs::path& directory, const std::string& name) {
  const KeyValueDoc hdr = KeyValueDoc::load((directory / (name + ".hdr")).string());
  if (hdr.get("dtype") != "float32-le") throw ValidationError(name + ".hdr: unsupported dtype");
  const auto w = static_cast<std::size_t>(hdr.get_int("width"));
  const auto h = static_cast<std::size_t>(hdr.get_int("height"));
  const Bytes raw = read_file(directory / (name + ".f32"));
  if (raw.size() != w * h * 4) throw ValidationError(name + ".f32: size does not match its header");
  ImageD map(w, h);
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = load_f32_le(raw.data() + 4 * i);
  return map;
}

inline constexpr const char* kSceneName = "scene.txt";

inline fs::path write_scene(const sim::ObjectScene& scene, const fs::path& directory, const std::string& kind = "") {
  scene.validate();
  StagedWriter writer(directory);
  Bytes amp, pha;
  amp.reserve(scene.amplitude.size() * 8);
  pha.reserve(scene.phase.size() * 8);
  for (double v : scene.amplitude.data()) append_f64_le(amp, v);
  for (double v : scene.phase.data()) append_f64_le(pha, v);
  writer.stage("amplitude.f64", amp);
  writer.stage("phase.f64", pha);
  KeyValueDoc doc;
  doc.set("format_version", 1);
  if (!kind.empty()) doc.set("kind", kind);
  doc.set("width", scene.width());
  doc.set("height", scene.height());
  doc.set("scene_pitch_um", scene.scene_pitch_um);
  doc.set("mode", sim::to_string(scene.mode));
  doc.set("background_re", scene.background.real());
  doc.set("background_im", scene.background.imag());
  doc.set("amplitude_file", "amplitude.f64");
  doc.set("phase_file", "phase.f64");
  const fs::path out = writer.stage(kSceneName, to_bytes(doc.serialize()));
  writer.commit();
  return out;
}

inline sim::ObjectScene read_scene(const fs::path& scene_or_dir) {
  const fs::path path = fs::is_directory(scene_or_dir) ? scene_or_dir / kSceneName : scene_or_dir;
  if (!fs::exists(path)) throw IoError("scene '" + path.string() + "' not found");
  const KeyValueDoc doc = KeyValueDoc::load(path.string());
  if (doc.get_int("format_version") > 1) throw UnsupportedVersion("scene format version is newer than supported");
  const auto w = static_cast<std::size_t>(doc.get_int("width"));
  const auto h = static_cast<std::size_t>(doc.get_int("height"));
  const auto load = [&](const std::string& key) {
    const Bytes raw = read_file(path.parent_path() / doc.get(key));
    if (raw.size() != w * h * 8) throw ValidationError(doc.get(key) + ": size does not match the scene header");
    ImageD img(w, h);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = load_f64_le(raw.data() + 8 * i);
    return img;
  };
  sim::ObjectScene scene;
  scene.amplitude = load("amplitude_file");
  scene.phase = load("phase_file");
  scene.scene_pitch_um = doc.get_double("scene_pitch_um");
  scene.mode = sim::parse_scene_mode(doc.get_or("mode", "transmission"));
  scene.background = {doc.get_double_or("background_re", 1.0), doc.get_double_or("background_im", 0.0)};
  scene.validate();
  return scene;
}

}  // namespace iup::io
