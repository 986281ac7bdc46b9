#pragma once

// Synthetic frame stacks for an induced-coherence (undetected photon)
// interferometer. The object sits in the idler arm; its complex transmittance
// t modulates the visible fringe seen by the camera:
//
//   counts = dark + N * G * [1 + V_sys * E(dL) * |t~| * cos(scan + arg t~)]
//
// where t~ is the object field resampled onto the sensor (magnification) and
// blurred by the idler-limited point spread function, G the beam envelope and
// E the coherence envelope. One fringe period is half an idler wavelength of
// scanning-mirror travel.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "iup/errors.hpp"
#include "iup/image.hpp"
#include "iup/parallel.hpp"
#include "iup/rng.hpp"

namespace iup::sim {

using Complex = std::complex<double>;

enum class SceneMode { transmission, reflection };

// Object in the idler arm. Amplitudes are field (not intensity) factors.
struct ObjectScene {
  ImageD amplitude;  // |t| in [0, 1]
  ImageD phase;      // radians
  SceneMode mode = SceneMode::transmission;
  double scene_pitch_um = 0.0;  // object-plane size of one scene pixel
  Complex background{1.0, 0.0};  // field beyond the scene edge (bare sample mirror)

  std::size_t width() const noexcept { return amplitude.width(); }
  std::size_t height() const noexcept { return amplitude.height(); }

  void validate() const {
    if (amplitude.empty()) throw InvalidInput("scene is empty");
    if (!amplitude.same_shape(phase)) throw InvalidInput("scene amplitude and phase maps differ in shape");
    for (double a : amplitude.data())
      if (!(a >= 0.0 && a <= 1.0)) throw InvalidInput("scene amplitude outside [0, 1]");
    for (double p : phase.data())
      if (!std::isfinite(p)) throw InvalidInput("scene phase is not finite");
    if (!(scene_pitch_um > 0.0)) throw InvalidInput("scene pitch must be positive");
  }
};

struct SensorGeometry {
  std::size_t width = 1280;
  std::size_t height = 1024;
  double pixel_pitch_um = 5.2;
};

// How object loss couples into fringe visibility.
enum class VisibilityCoupling { field_amplitude, intensity };

struct OpticalConfig {
  double pump_wavelength_nm = 532.0;
  double detected_wavelength_nm = 808.0;
  double undetected_wavelength_nm = 1557.45;
  double f_u_mm = 50.0;
  double f_c_mm = 75.0;
  double pump_waist_mm = 0.5;
  double system_visibility = 1.0;
  double coherence_length_mm = 0.1;
  double path_mismatch_mm = 0.0;
  SensorGeometry sensor{};
  double mean_counts = 1000.0;
  // 1/e^2 radius of the beam envelope as a fraction of half the short sensor
  // axis; <= 0 gives flat illumination.
  double illumination_radius_fraction = 0.8;
  VisibilityCoupling coupling = VisibilityCoupling::field_amplitude;

  void validate() const {
    const double lengths[] = {pump_wavelength_nm, detected_wavelength_nm, undetected_wavelength_nm,
                              f_u_mm, f_c_mm, pump_waist_mm, coherence_length_mm, sensor.pixel_pitch_um};
    for (double v : lengths)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("optical lengths must be positive and finite");
    if (sensor.width == 0 || sensor.height == 0) throw ConfigError("sensor has zero area");
    if (!(system_visibility >= 0.0 && system_visibility <= 1.0))
      throw ConfigError("system visibility must lie in [0, 1]");
    if (!(mean_counts >= 0.0)) throw ConfigError("mean_counts must be >= 0");
    if (!std::isfinite(path_mismatch_mm)) throw ConfigError("path mismatch must be finite");
    const double lhs = 1.0 / detected_wavelength_nm + 1.0 / undetected_wavelength_nm;
    const double rhs = 1.0 / pump_wavelength_nm;
    if (std::abs(lhs - rhs) > 1e-3 * rhs)
      throw ConfigError("wavelengths violate energy conservation (1/detected + 1/undetected != 1/pump)");
  }
};

struct ScanPlan {
  std::vector<double> mirror_positions_nm;
  double exposure_ms = 200.0;

  std::size_t frame_count() const noexcept { return mirror_positions_nm.size(); }

  // K equal mirror steps spanning one fringe oscillation, endpoint excluded.
  static ScanPlan one_oscillation(std::size_t frames, double idler_nm, double exposure_ms = 200.0) {
    ScanPlan plan;
    plan.exposure_ms = exposure_ms;
    plan.mirror_positions_nm.resize(frames);
    for (std::size_t k = 0; k < frames; ++k)
      plan.mirror_positions_nm[k] = 0.5 * idler_nm * static_cast<double>(k) / static_cast<double>(frames);
    return plan;
  }

  void validate() const {
    if (mirror_positions_nm.empty()) throw InvalidInput("scan plan has no frames");
    for (double d : mirror_positions_nm)
      if (!std::isfinite(d)) throw InvalidInput("scan plan holds a non-finite mirror position");
  }
};

struct NoiseModel {
  bool shot_noise = false;
  double read_noise_sigma = 0.0;
  double dark_offset = 0.0;
  std::uint64_t rng_seed = 0;

  static NoiseModel none() { return {}; }

  bool noiseless() const noexcept { return !shot_noise && read_noise_sigma == 0.0; }

  void validate() const {
    if (!(read_noise_sigma >= 0.0)) throw InvalidInput("read noise sigma must be >= 0");
    if (!(dark_offset >= 0.0)) throw InvalidInput("dark offset must be >= 0");
  }
};

// Round-trip phase change of a mirror displaced by d: the fringe repeats every
// half idler wavelength.
inline double fringe_phase_from_mirror(double displacement_nm, double idler_wavelength_nm) {
  if (!(idler_wavelength_nm > 0.0)) throw InvalidInput("idler wavelength must be positive");
  return 4.0 * std::numbers::pi * displacement_nm / idler_wavelength_nm;
}

// Gaussian with FWHM equal to the coherence length.
inline double coherence_envelope(double path_mismatch_mm, double coherence_length_mm) {
  if (!(coherence_length_mm > 0.0)) throw InvalidInput("coherence length must be positive");
  const double r = path_mismatch_mm / coherence_length_mm;
  return std::exp(-4.0 * std::numbers::ln2 * r * r);
}

// Object-plane resolution f_u * lambda_u / (sqrt(2) * pi * w_p), in micrometres.
inline double psf_width_um(double f_u_mm, double lambda_u_nm, double pump_waist_mm) {
  if (!(f_u_mm > 0.0 && lambda_u_nm > 0.0 && pump_waist_mm > 0.0))
    throw InvalidInput("psf_width: inputs must be positive");
  const double nm = f_u_mm * lambda_u_nm / (std::numbers::sqrt2 * std::numbers::pi * pump_waist_mm);
  return nm * 1e-3;
}

// Object-to-sensor magnification (f_c * lambda_d) / (f_u * lambda_u).
inline double magnification(double f_c_mm, double f_u_mm, double lambda_d_nm, double lambda_u_nm) {
  if (!(f_c_mm > 0.0 && f_u_mm > 0.0 && lambda_d_nm > 0.0 && lambda_u_nm > 0.0))
    throw InvalidInput("magnification: inputs must be positive");
  return (f_c_mm * lambda_d_nm) / (f_u_mm * lambda_u_nm);
}

inline double magnification(const OpticalConfig& c) {
  return magnification(c.f_c_mm, c.f_u_mm, c.detected_wavelength_nm, c.undetected_wavelength_nm);
}

// PSF 1/e^2 radius on the sensor, in pixels.
inline double psf_radius_px(const OpticalConfig& c) {
  return magnification(c) * psf_width_um(c.f_u_mm, c.undetected_wavelength_nm, c.pump_waist_mm) /
         c.sensor.pixel_pitch_um;
}

namespace detail {

inline Complex scene_value(const ObjectScene& s, std::size_t x, std::size_t y) {
  return std::polar(s.amplitude(x, y), s.phase(x, y));
}

// Bilinear sample at fractional scene coordinates; background outside.
inline Complex sample_scene(const ObjectScene& s, double sx, double sy) {
  const double max_x = static_cast<double>(s.width() - 1);
  const double max_y = static_cast<double>(s.height() - 1);
  if (!(sx >= 0.0 && sx <= max_x && sy >= 0.0 && sy <= max_y)) return s.background;
  const auto x0 = static_cast<std::size_t>(sx);
  const auto y0 = static_cast<std::size_t>(sy);
  const std::size_t x1 = std::min(x0 + 1, s.width() - 1);
  const std::size_t y1 = std::min(y0 + 1, s.height() - 1);
  const double fx = sx - static_cast<double>(x0);
  const double fy = sy - static_cast<double>(y0);
  // Exact hits skip interpolation so one-to-one resampling is lossless.
  if (fx == 0.0 && fy == 0.0) return scene_value(s, x0, y0);
  const Complex top = (1.0 - fx) * scene_value(s, x0, y0) + fx * scene_value(s, x1, y0);
  const Complex bottom = (1.0 - fx) * scene_value(s, x0, y1) + fx * scene_value(s, x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

inline std::vector<double> gaussian_kernel(double radius_px) {
  if (!(radius_px > 1e-3)) return {1.0};
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(3.0 * radius_px));
  std::vector<double> k(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -half; i <= half; ++i) {
    const double d = static_cast<double>(i) / radius_px;
    const double v = std::exp(-2.0 * d * d);
    k[static_cast<std::size_t>(i + half)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution with edge clamping.
inline Image<Complex> blur(const Image<Complex>& in, const std::vector<double>& kernel, unsigned workers) {
  if (kernel.size() == 1) return in;
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto w = static_cast<std::ptrdiff_t>(in.width());
  const auto h = static_cast<std::ptrdiff_t>(in.height());
  Image<Complex> tmp(in.width(), in.height());
  Image<Complex> out(in.width(), in.height());
  parallel_rows(in.height(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t y = b; y < e; ++y)
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        Complex acc{};
        for (std::ptrdiff_t i = -half; i <= half; ++i) {
          const std::ptrdiff_t xx = std::clamp<std::ptrdiff_t>(x + i, 0, w - 1);
          acc += kernel[static_cast<std::size_t>(i + half)] * in(static_cast<std::size_t>(xx), y);
        }
        tmp(static_cast<std::size_t>(x), y) = acc;
      }
  });
  parallel_rows(in.height(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t y = b; y < e; ++y)
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        Complex acc{};
        for (std::ptrdiff_t i = -half; i <= half; ++i) {
          const std::ptrdiff_t yy = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(y) + i, 0, h - 1);
          acc += kernel[static_cast<std::size_t>(i + half)] * tmp(static_cast<std::size_t>(x), static_cast<std::size_t>(yy));
        }
        out(static_cast<std::size_t>(x), y) = acc;
      }
  });
  return out;
}

}  // namespace detail

// Object field on the sensor grid: magnified, resampled and PSF-blurred (t~).
inline Image<Complex> effective_field(const ObjectScene& scene, const OpticalConfig& config, unsigned workers = 1) {
  scene.validate();
  config.validate();
  const double m = magnification(config);
  const auto& sensor = config.sensor;
  const double pitch = sensor.pixel_pitch_um;

  const double footprint_x = static_cast<double>(scene.width()) * scene.scene_pitch_um * m / pitch;
  const double footprint_y = static_cast<double>(scene.height()) * scene.scene_pitch_um * m / pitch;
  if (footprint_x < 1.0 || footprint_y < 1.0)
    throw ConfigError("scene images onto less than one sensor pixel");

  const double cx = 0.5 * static_cast<double>(sensor.width - 1);
  const double cy = 0.5 * static_cast<double>(sensor.height - 1);
  const double scx = 0.5 * static_cast<double>(scene.width() - 1);
  const double scy = 0.5 * static_cast<double>(scene.height() - 1);
  const double to_scene = pitch / (m * scene.scene_pitch_um);

  Image<Complex> field(sensor.width, sensor.height);
  std::size_t covered = 0;
  for (std::size_t y = 0; y < sensor.height; ++y) {
    const double sy = (static_cast<double>(y) - cy) * to_scene + scy;
    for (std::size_t x = 0; x < sensor.width; ++x) {
      const double sx = (static_cast<double>(x) - cx) * to_scene + scx;
      if (sx >= 0.0 && sx <= 2.0 * scx && sy >= 0.0 && sy <= 2.0 * scy) ++covered;
      field(x, y) = detail::sample_scene(scene, sx, sy);
    }
  }
  if (covered == 0) throw ConfigError("scene does not overlap any sensor pixel");
  return detail::blur(field, detail::gaussian_kernel(psf_radius_px(config)), workers);
}

// Beam envelope G on the sensor grid.
inline ImageD illumination_profile(const OpticalConfig& config) {
  const auto& s = config.sensor;
  ImageD g(s.width, s.height, 1.0);
  if (!(config.illumination_radius_fraction > 0.0)) return g;
  const double radius =
      config.illumination_radius_fraction * 0.5 * static_cast<double>(std::min(s.width, s.height));
  const double cx = 0.5 * static_cast<double>(s.width - 1);
  const double cy = 0.5 * static_cast<double>(s.height - 1);
  for (std::size_t y = 0; y < s.height; ++y)
    for (std::size_t x = 0; x < s.width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      g(x, y) = std::exp(-2.0 * (dx * dx + dy * dy) / (radius * radius));
    }
  return g;
}

// Precomputes the scene-dependent terms once so that a stack of frames only
// pays for the cosine and the noise draws.
class Renderer {
 public:
  Renderer(const ObjectScene& scene, const OpticalConfig& config, const NoiseModel& noise, unsigned workers = 1)
      : config_(config), noise_(noise), workers_(workers) {
    noise_.validate();
    field_ = effective_field(scene, config, workers);
    illumination_ = illumination_profile(config);
    envelope_ = coherence_envelope(config.path_mismatch_mm, config.coherence_length_mm);
  }

  const Image<Complex>& field() const noexcept { return field_; }
  const ImageD& illumination() const noexcept { return illumination_; }
  double envelope() const noexcept { return envelope_; }

  // Noise-free expected counts at the given scan phase.
  ImageD expected(double scan_phase) const {
    ImageD out(field_.width(), field_.height());
    parallel_rows(field_.height(), workers_, [&](std::size_t b, std::size_t e) {
      for (std::size_t y = b; y < e; ++y)
        for (std::size_t x = 0; x < field_.width(); ++x) out(x, y) = mean_at(x, y, scan_phase);
    });
    return out;
  }

  ImageD frame(double scan_phase, std::uint64_t frame_index) const {
    ImageD out(field_.width(), field_.height());
    const std::size_t width = field_.width();
    parallel_rows(field_.height(), workers_, [&](std::size_t b, std::size_t e) {
      for (std::size_t y = b; y < e; ++y)
        for (std::size_t x = 0; x < width; ++x) {
          const double mu = mean_at(x, y, scan_phase);
          if (noise_.noiseless()) {
            out(x, y) = mu;
            continue;
          }
          CounterRng rng(noise_.rng_seed, frame_index, static_cast<std::uint64_t>(y) * width + x);
          double counts = noise_.shot_noise ? static_cast<double>(rng.poisson(mu)) : mu;
          if (noise_.read_noise_sigma > 0.0) counts += noise_.read_noise_sigma * rng.normal();
          // Sensors report no negative counts.
          out(x, y) = std::max(counts, 0.0);
        }
    });
    return out;
  }

 private:
  double mean_at(std::size_t x, std::size_t y, double scan_phase) const {
    const Complex t = field_(x, y);
    const double mag = std::abs(t);
    const double coupled = config_.coupling == VisibilityCoupling::field_amplitude ? mag : mag * mag;
    const double fringe = mag > 0.0 ? std::cos(scan_phase + std::arg(t)) : 0.0;
    return noise_.dark_offset +
           config_.mean_counts * illumination_(x, y) *
               (1.0 + config_.system_visibility * envelope_ * coupled * fringe);
  }

  OpticalConfig config_;
  NoiseModel noise_;
  unsigned workers_;
  Image<Complex> field_;
  ImageD illumination_;
  double envelope_ = 1.0;
};

inline ImageD render_frame(const ObjectScene& scene, const OpticalConfig& config, double scan_phase,
                           const NoiseModel& noise, std::uint64_t frame_index) {
  return Renderer(scene, config, noise).frame(scan_phase, frame_index);
}

inline FrameStack simulate_stack(const ObjectScene& scene, const OpticalConfig& config, const ScanPlan& plan,
                                 const NoiseModel& noise, unsigned workers = 1) {
  plan.validate();
  const Renderer renderer(scene, config, noise, workers);
  FrameStack stack;
  stack.frames.reserve(plan.frame_count());
  for (std::size_t k = 0; k < plan.frame_count(); ++k) {
    const double phase = fringe_phase_from_mirror(plan.mirror_positions_nm[k], config.undetected_wavelength_nm);
    stack.scan_phases.push_back(phase);
    stack.frames.push_back(renderer.frame(phase, k));
  }
  stack.meta = AcquisitionMeta{config.pump_wavelength_nm, config.detected_wavelength_nm,
                               config.undetected_wavelength_nm, plan.exposure_ms, config.sensor.pixel_pitch_um};
  return stack;
}

inline std::string to_string(SceneMode mode) {
  return mode == SceneMode::transmission ? "transmission" : "reflection";
}

inline SceneMode parse_scene_mode(const std::string& text) {
  if (text == "transmission") return SceneMode::transmission;
  if (text == "reflection") return SceneMode::reflection;
  throw InvalidInput("unknown scene mode '" + text + "'");
}

}  // namespace iup::sim
