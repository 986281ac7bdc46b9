#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iup/errors.hpp"

namespace iup {

// Row-major 2-D buffer. Index (x, y) with x along the row.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> row(std::size_t y) { return {data_.data() + y * width_, width_}; }
  std::span<const T> row(std::size_t y) const { return {data_.data() + y * width_, width_}; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using ImageD = Image<double>;

// Acquisition record carried alongside a stack. Zero means "not recorded".
struct AcquisitionMeta {
  double pump_nm = 0.0;
  double detected_nm = 0.0;
  double undetected_nm = 0.0;
  double exposure_ms = 0.0;
  double pixel_pitch_um = 0.0;

  friend bool operator==(const AcquisitionMeta&, const AcquisitionMeta&) = default;
};

// K camera frames recorded at successive positions of the fringe scan.
struct FrameStack {
  std::vector<ImageD> frames;
  std::vector<double> scan_phases;  // radians, one per frame
  std::optional<AcquisitionMeta> meta;

  std::size_t frame_count() const noexcept { return frames.size(); }
  std::size_t width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }
  std::size_t height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }

  // Throws InvalidInput on the first violated invariant.
  void validate() const {
    if (frames.empty()) throw InvalidInput("frame stack is empty");
    if (scan_phases.size() != frames.size())
      throw InvalidInput("scan_phases has " + std::to_string(scan_phases.size()) +
                         " entries for " + std::to_string(frames.size()) + " frames");
    const auto& first = frames.front();
    if (first.empty()) throw InvalidInput("frames have zero area");
    for (std::size_t k = 0; k < frames.size(); ++k) {
      if (!frames[k].same_shape(first))
        throw InvalidInput("frame " + std::to_string(k) + " differs in size from frame 0");
      for (double v : frames[k].data())
        if (!std::isfinite(v) || v < 0.0)
          throw InvalidInput("frame " + std::to_string(k) + " holds a negative or non-finite count");
    }
    for (double p : scan_phases)
      if (!std::isfinite(p)) throw InvalidInput("non-finite scan phase");
  }
};

// Keeps the first n frames (and their scan phases) of a stack.
inline FrameStack truncate_frames(const FrameStack& stack, std::size_t n) {
  if (stack.scan_phases.size() != stack.frame_count())
    throw InvalidInput("scan_phases length does not match frame count");
  if (n == 0 || n > stack.frame_count())
    throw InvalidInput("cannot keep " + std::to_string(n) + " of " +
                       std::to_string(stack.frame_count()) + " frames");
  FrameStack out;
  out.frames.assign(stack.frames.begin(), stack.frames.begin() + static_cast<std::ptrdiff_t>(n));
  out.scan_phases.assign(stack.scan_phases.begin(),
                         stack.scan_phases.begin() + static_cast<std::ptrdiff_t>(n));
  out.meta = stack.meta;
  return out;
}

}  // namespace iup
