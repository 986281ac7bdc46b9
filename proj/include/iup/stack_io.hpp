#pragma once

// On-disk frame stacks: one binary PGM (P5, 16-bit big-endian) per frame plus
// a `manifest.txt` key/value document. Counts are stored as
// round(counts * gain); the gain is recorded so reading restores counts to
// within half a quantization step.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iup/errors.hpp"
#include "iup/image.hpp"
#include "iup/io_util.hpp"
#include "iup/keyvalue.hpp"

namespace iup::io {

inline constexpr int kStackFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.txt";

struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 65535;
  std::vector<std::uint16_t> samples;
};

inline Bytes encode_pgm16(const PgmImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" + std::to_string(img.maxval) + "\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + 2 * img.samples.size());
  for (std::uint16_t v : img.samples) {
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v & 0xFF));
  }
  return out;
}

inline PgmImage decode_pgm(const Bytes& data, const std::string& name) {
  std::size_t pos = 0;
  const auto fail = [&](const std::string& why) { return ValidationError(name + ": " + why); };
  const auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(data[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  const auto read_uint = [&]() -> std::size_t {
    skip_space();
    std::size_t v = 0;
    const std::size_t start = pos;
    while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') v = v * 10 + (data[pos++] - '0');
    if (pos == start) throw fail("malformed PGM header");
    return v;
  };
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') throw fail("not a binary PGM (P5)");
  pos = 2;
  PgmImage img;
  img.width = read_uint();
  img.height = read_uint();
  const std::size_t maxval = read_uint();
  if (maxval == 0 || maxval > 65535) throw fail("unsupported maxval");
  img.maxval = static_cast<unsigned>(maxval);
  if (pos >= data.size() || !std::isspace(data[pos])) throw fail("malformed PGM header");
  ++pos;
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t n = img.width * img.height;
  if (data.size() - pos != n * bytes_per) throw fail("pixel data length does not match header");
  img.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    img.samples[i] = bytes_per == 2 ? static_cast<std::uint16_t>((data[pos + 2 * i] << 8) | data[pos + 2 * i + 1])
                                    : data[pos + i];
  }
  return img;
}

inline double max_count(const FrameStack& stack) {
  double m = 0.0;
  for (const auto& f : stack.frames)
    for (double v : f.data()) m = std::max(m, v);
  return m;
}

// Largest power of two that keeps every count within 16 bits. Powers of two
// make reading and re-writing a stack reproduce identical samples.
inline double auto_gain(double max_value) {
  if (!(max_value > 0.0)) return 1.0;
  int exponent = 0;
  std::frexp(65535.0 / max_value, &exponent);
  double gain = std::ldexp(1.0, exponent - 1);
  while (std::round(max_value * gain) > 65535.0) gain *= 0.5;
  return gain;
}

struct StackWriteOptions {
  std::optional<double> gain;  // empty: auto_gain
};

inline std::string frame_file_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%03zu.pgm", k);
  return buf;
}

// Writes frames and manifest into `directory`; returns the manifest path.
inline fs::path write_stack(const FrameStack& stack, const fs::path& directory, const StackWriteOptions& options = {}) {
  stack.validate();
  const double peak = max_count(stack);
  const double gain = options.gain ? *options.gain : auto_gain(peak);
  if (!(gain > 0.0) || !std::isfinite(gain)) throw InvalidInput("stack gain must be positive and finite");
  if (std::round(peak * gain) > 65535.0)
    throw OverflowError("count " + format_double(peak) + " times gain " + format_double(gain) +
                        " exceeds the 16-bit range");

  StagedWriter writer(directory);
  std::vector<std::string> names, checksums;
  for (std::size_t k = 0; k < stack.frame_count(); ++k) {
    const auto& frame = stack.frames[k];
    PgmImage img{frame.width(), frame.height(), 65535, {}};
    img.samples.resize(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i)
      img.samples[i] = static_cast<std::uint16_t>(std::lround(frame[i] * gain));
    const Bytes bytes = encode_pgm16(img);
    names.push_back(frame_file_name(k));
    checksums.push_back(checksum_string(bytes));
    writer.stage(names.back(), bytes);
  }

  KeyValueDoc doc;
  doc.set("format_version", kStackFormatVersion);
  doc.set("width", stack.width());
  doc.set("height", stack.height());
  doc.set("frame_count", stack.frame_count());
  doc.set("gain", gain);
  doc.set_list("scan_phases", stack.scan_phases);
  const AcquisitionMeta meta = stack.meta.value_or(AcquisitionMeta{});
  doc.set("pump_nm", meta.pump_nm);
  doc.set("detected_nm", meta.detected_nm);
  doc.set("undetected_nm", meta.undetected_nm);
  doc.set("exposure_ms", meta.exposure_ms);
  doc.set("pixel_pitch_um", meta.pixel_pitch_um);
  doc.set_list("frame_files", names);
  doc.set_list("frame_checksums", checksums);
  const fs::path manifest = writer.stage(kManifestName, to_bytes(doc.serialize()));
  writer.commit();
  return manifest;
}

// Accepts the manifest path or the directory holding it.
inline FrameStack read_stack(const fs::path& manifest_or_dir) {
  const fs::path manifest = fs::is_directory(manifest_or_dir) ? manifest_or_dir / kManifestName : manifest_or_dir;
  if (!fs::exists(manifest)) throw IoError("manifest '" + manifest.string() + "' not found");
  const KeyValueDoc doc = KeyValueDoc::load(manifest.string());
  const fs::path dir = manifest.parent_path();

  const auto version = doc.get_int("format_version");
  if (version > kStackFormatVersion)
    throw UnsupportedVersion("stack format version " + std::to_string(version) + " is newer than supported version " +
                             std::to_string(kStackFormatVersion));
  if (version < 1) throw ValidationError("invalid stack format version " + std::to_string(version));

  const auto width = doc.get_int("width");
  const auto height = doc.get_int("height");
  const auto count = doc.get_int("frame_count");
  if (width <= 0 || height <= 0 || count <= 0) throw ValidationError("manifest dimensions must be positive");
  const auto files = doc.get_list("frame_files");
  const auto checksums = doc.get_list("frame_checksums");
  const auto phases = doc.get_double_list("scan_phases");
  if (files.size() != static_cast<std::size_t>(count))
    throw ValidationError("manifest lists " + std::to_string(files.size()) + " frame files for frame_count " +
                          std::to_string(count));
  if (checksums.size() != files.size()) throw ValidationError("manifest checksum count differs from frame count");
  if (phases.size() != files.size()) throw ValidationError("manifest scan_phases count differs from frame count");
  const double gain = doc.get_double("gain");
  if (!(gain > 0.0)) throw ValidationError("manifest gain must be positive");

  FrameStack stack;
  stack.scan_phases = phases;
  for (std::size_t k = 0; k < files.size(); ++k) {
    const fs::path path = dir / files[k];
    if (!fs::exists(path)) throw IoError("frame " + std::to_string(k) + " file '" + path.string() + "' is missing");
    const Bytes bytes = read_file(path);
    if (checksum_string(bytes) != checksums[k])
      throw IntegrityError("frame " + std::to_string(k) + " ('" + files[k] + "') fails its checksum");
    const PgmImage img = decode_pgm(bytes, files[k]);
    if (img.width != static_cast<std::size_t>(width) || img.height != static_cast<std::size_t>(height))
      throw ValidationError("frame " + std::to_string(k) + " dimensions differ from the manifest");
    ImageD frame(img.width, img.height);
    for (std::size_t i = 0; i < frame.size(); ++i) frame[i] = static_cast<double>(img.samples[i]) / gain;
    stack.frames.push_back(std::move(frame));
  }
  AcquisitionMeta meta;
  meta.pump_nm = doc.get_double_or("pump_nm", 0.0);
  meta.detected_nm = doc.get_double_or("detected_nm", 0.0);
  meta.undetected_nm = doc.get_double_or("undetected_nm", 0.0);
  meta.exposure_ms = doc.get_double_or("exposure_ms", 0.0);
  meta.pixel_pitch_um = doc.get_double_or("pixel_pitch_um", 0.0);
  stack.meta = meta;
  return stack;
}

// Gain recorded in a stack manifest.
inline double read_stack_gain(const fs::path& manifest_or_dir) {
  const fs::path manifest = fs::is_directory(manifest_or_dir) ? manifest_or_dir / kManifestName : manifest_or_dir;
  return KeyValueDoc::load(manifest.string()).get_double("gain");
}

}  // namespace iup::io
