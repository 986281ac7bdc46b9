#pragma once

// Deterministic synthetic objects: stand-ins for an interdigitated ring
// electrode, an organic sample with continuously varying transmission, a pure
// phase step and an empty field.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "iup/errors.hpp"
#include "iup/interferometer.hpp"

namespace iup::sim {

enum class TargetKind { ring_electrode, smooth_wing, phase_step, uniform };

struct TargetParams {
  double ring_period_px = 0.0;  // 0: one sixteenth of the short side
  double phase_step_rad = std::numbers::pi / 4.0;
  double scene_pitch_um = 0.0;  // 0: one scene pixel per sensor pixel at the default optics
  SceneMode mode = SceneMode::transmission;
};

// Scene pitch that maps one scene pixel onto one sensor pixel for `config`.
inline double matched_scene_pitch_um(const OpticalConfig& config = {}) {
  return config.sensor.pixel_pitch_um / magnification(config);
}

inline TargetKind parse_target_kind(const std::string& text) {
  if (text == "ring-electrode") return TargetKind::ring_electrode;
  if (text == "smooth-wing") return TargetKind::smooth_wing;
  if (text == "phase-step") return TargetKind::phase_step;
  if (text == "uniform") return TargetKind::uniform;
  throw InvalidInput("unknown target kind '" + text +
                     "' (expected ring-electrode, smooth-wing, phase-step or uniform)");
}

inline std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::ring_electrode: return "ring-electrode";
    case TargetKind::smooth_wing: return "smooth-wing";
    case TargetKind::phase_step: return "phase-step";
    case TargetKind::uniform: return "uniform";
  }
  return "unknown";
}

inline ObjectScene make_test_target(TargetKind kind, std::size_t width, std::size_t height,
                                    const TargetParams& params = {}) {
  if (width == 0 || height == 0) throw InvalidInput("target size must be positive");
  ObjectScene scene;
  scene.amplitude = ImageD(width, height, 1.0);
  scene.phase = ImageD(width, height, 0.0);
  scene.mode = params.mode;
  scene.scene_pitch_um = params.scene_pitch_um > 0.0 ? params.scene_pitch_um : matched_scene_pitch_um();

  const double cx = 0.5 * static_cast<double>(width - 1);
  const double cy = 0.5 * static_cast<double>(height - 1);
  const double short_side = static_cast<double>(std::min(width, height));

  switch (kind) {
    case TargetKind::uniform:
      break;

    case TargetKind::ring_electrode: {
      // Concentric opaque rings inside a clear field, split by a clear radial
      // gap along +x so the two electrode combs interleave.
      const double period = params.ring_period_px > 0.0 ? params.ring_period_px : short_side / 16.0;
      const double outer = 0.45 * short_side;
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
          const double dx = static_cast<double>(x) - cx;
          const double dy = static_cast<double>(y) - cy;
          const double r = std::hypot(dx, dy);
          if (r > outer) continue;
          const bool metal = std::fmod(r, period) < 0.5 * period;
          const bool gap = dx > 0.0 && std::abs(dy) < 0.25 * period;
          scene.amplitude(x, y) = (metal && !gap) ? 0.0 : 1.0;
        }
      break;
    }

    case TargetKind::smooth_wing: {
      // Elliptical body with smoothly varying absorption, vein modulation and
      // a thickness-like phase profile.
      const double ax = 0.42 * static_cast<double>(width);
      const double ay = 0.30 * static_cast<double>(height);
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
          const double u = (static_cast<double>(x) - cx) / ax;
          const double v = (static_cast<double>(y) - cy) / ay;
          const double r2 = u * u + v * v;
          const double body = std::exp(-r2 * r2 * r2);
          const double veins = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * (3.0 * u + 1.5 * v * v));
          scene.amplitude(x, y) = 1.0 - 0.6 * body * (0.7 + 0.3 * veins);
          scene.phase(x, y) = 0.8 * body;
        }
      break;
    }

    case TargetKind::phase_step:
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = width / 2; x < width; ++x) scene.phase(x, y) = params.phase_step_rad;
      break;
  }
  return scene;
}

}  // namespace iup::sim
