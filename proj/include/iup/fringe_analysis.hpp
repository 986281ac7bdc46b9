#pragma once

// Per-pixel fringe extraction: a frame stack scanned over the interference
// oscillation is reduced to visibility, contrast, phase and DC maps from the
// DC and fundamental Fourier components of each pixel's time series.
//
// Conventions
//   Frame k sits at scan phase 2*pi*k/K (endpoint excluded). A pixel series
//   A + B*cos(2*pi*f*k/K + phi) has raw fundamental X1 = (K/2)*B*exp(i*phi)
//   and raw DC X0 = K*A, so
//     visibility = 2|X1|/X0 = B/A
//     contrast   = 4|X1|/K  = 2B   (peak-to-trough swing, any K)
//     phase      = arg X1   = phi
//   Off-bin frequencies go through a least-squares sinusoid fit whose
//   coefficients are rescaled onto the same raw-DFT scale.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iup/errors.hpp"
#include "iup/image.hpp"
#include "iup/parallel.hpp"

namespace iup::fringe {

using Complex = std::complex<double>;

namespace detail {

// cos/sin of 2*pi*num/den with the argument reduced to [0, 2*pi) exactly.
inline Complex unit_phasor(std::size_t num, std::size_t den) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(num % den) /
                       static_cast<double>(den);
  return {std::cos(angle), std::sin(angle)};
}

struct Mat3 {
  double a[3][3];
};

// Inverse of a symmetric 3x3 matrix by cofactors. Returns false when singular.
inline bool invert3(const Mat3& m, Mat3& inv) {
  const auto& a = m.a;
  const double c00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
  const double c01 = a[1][2] * a[2][0] - a[1][0] * a[2][2];
  const double c02 = a[1][0] * a[2][1] - a[1][1] * a[2][0];
  const double det = a[0][0] * c00 + a[0][1] * c01 + a[0][2] * c02;
  const double scale = std::abs(a[0][0]) * std::abs(a[1][1]) * std::abs(a[2][2]);
  if (!(std::abs(det) > 1e-14 * scale)) return false;
  const double r = 1.0 / det;
  inv.a[0][0] = c00 * r;
  inv.a[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * r;
  inv.a[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * r;
  inv.a[1][0] = c01 * r;
  inv.a[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * r;
  inv.a[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * r;
  inv.a[2][0] = c02 * r;
  inv.a[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * r;
  inv.a[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * r;
  return true;
}

inline void require_single_bin_frequency(std::size_t k_frames, double f) {
  if (k_frames < 3)
    throw NyquistViolation("at least 3 frames are required per fringe period (Nyquist limit); got " +
                           std::to_string(k_frames));
  const double nyquist = 0.5 * static_cast<double>(k_frames);
  if (!(f > 0.0 && f < nyquist))
    throw NyquistViolation("fringe frequency " + std::to_string(f) +
                           " cycles/scan lies outside (0, " + std::to_string(nyquist) + ")");
}

}  // namespace detail

// Linear projection of a K-sample series onto {DC, fundamental}, expressed on
// the raw-DFT scale: X0 = sum(w0*y), X1 = sum(w_re*y) + i*sum(w_im*y).
struct Projection {
  std::vector<double> w0, w_re, w_im;
  double frequency = 1.0;

  std::size_t frame_count() const noexcept { return w0.size(); }

  // Exact DFT bin m.
  static Projection dft_bin(std::size_t k_frames, std::size_t m) {
    Projection p;
    p.frequency = static_cast<double>(m);
    p.w0.assign(k_frames, 1.0);
    p.w_re.resize(k_frames);
    p.w_im.resize(k_frames);
    for (std::size_t k = 0; k < k_frames; ++k) {
      const Complex e = detail::unit_phasor(k * m, k_frames);
      p.w_re[k] = e.real();
      p.w_im[k] = -e.imag();
    }
    return p;
  }

  // Least-squares fit of A + a*cos(t) + b*sin(t), t = 2*pi*f*k/K, rescaled so
  // that X0 = K*A and X1 = (K/2)*(a - i*b).
  static Projection least_squares(std::size_t k_frames, double f) {
    detail::require_single_bin_frequency(k_frames, f);
    const double kd = static_cast<double>(k_frames);
    std::vector<double> c(k_frames), s(k_frames);
    detail::Mat3 normal{};
    for (std::size_t k = 0; k < k_frames; ++k) {
      const double t = 2.0 * std::numbers::pi * f * static_cast<double>(k) / kd;
      c[k] = std::cos(t);
      s[k] = std::sin(t);
      const double basis[3] = {1.0, c[k], s[k]};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) normal.a[i][j] += basis[i] * basis[j];
    }
    detail::Mat3 inv{};
    if (!detail::invert3(normal, inv))
      throw NyquistViolation("sinusoid fit is singular at " + std::to_string(f) + " cycles/scan");

    Projection p;
    p.frequency = f;
    p.w0.resize(k_frames);
    p.w_re.resize(k_frames);
    p.w_im.resize(k_frames);
    for (std::size_t k = 0; k < k_frames; ++k) {
      const double basis[3] = {1.0, c[k], s[k]};
      double row[3] = {0.0, 0.0, 0.0};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) row[i] += inv.a[i][j] * basis[j];
      p.w0[k] = kd * row[0];
      p.w_re[k] = 0.5 * kd * row[1];
      p.w_im[k] = -0.5 * kd * row[2];
    }
    return p;
  }

  Complex fundamental(std::span<const double> y) const {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      re += w_re[k] * y[k];
      im += w_im[k] * y[k];
    }
    return {re, im};
  }

  double dc(std::span<const double> y) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) acc += w0[k] * y[k];
    return acc;
  }
};

// Raw, unnormalized DFT coefficient X_m = sum_k y[k]*exp(-2*pi*i*k*m/K).
inline Complex dft_component(std::span<const double> series, std::size_t m) {
  if (series.empty()) throw InvalidInput("dft_component: empty series");
  const std::size_t k_frames = series.size();
  if (m >= k_frames)
    throw InvalidInput("dft_component: harmonic " + std::to_string(m) + " out of range for " +
                       std::to_string(k_frames) + " samples");
  if (m == 0) {
    double acc = 0.0;
    for (double v : series) acc += v;
    return {acc, 0.0};
  }
  Complex acc{0.0, 0.0};
  for (std::size_t k = 0; k < k_frames; ++k) acc += series[k] * std::conj(detail::unit_phasor(k * m, k_frames));
  return acc;
}

struct SinusoidFit {
  double offset = 0.0;       // A
  Complex amplitude{};       // c in A + Re[c*exp(i*t)]
  double residual_energy = 0.0;
};

// Least-squares fit of A + Re[c*exp(2*pi*i*f*k/K)] to the series.
inline SinusoidFit fit_sinusoid(std::span<const double> series, double f) {
  const Projection p = Projection::least_squares(series.size(), f);
  const double kd = static_cast<double>(series.size());
  SinusoidFit fit;
  fit.offset = p.dc(series) / kd;
  fit.amplitude = p.fundamental(series) * (2.0 / kd);
  const double a = fit.amplitude.real();
  const double b = -fit.amplitude.imag();
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double t = 2.0 * std::numbers::pi * f * static_cast<double>(k) / kd;
    const double r = series[k] - (fit.offset + a * std::cos(t) + b * std::sin(t));
    fit.residual_energy += r * r;
  }
  return fit;
}

// Complex fringe amplitude c at f cycles per scan window. For integer f = m
// with K > 2m this equals (2/K)*X_m.
inline Complex single_bin_amplitude(std::span<const double> series, double f) {
  return fit_sinusoid(series, f).amplitude;
}

// 2*F1/F0 from raw magnitudes. Empty when F0 is not positive (masked pixel).
inline std::optional<double> visibility(double f0, double f1) {
  if (!(f0 > 0.0)) return std::nullopt;
  return 2.0 * f1 / f0;
}

// Peak-to-trough swing N_max - N_min = 4*F1/K. Coincides with the raw F1 at K = 4.
inline double contrast(double f1, std::size_t k_frames) {
  if (k_frames < 3)
    throw NyquistViolation("contrast needs at least 3 frames; got " + std::to_string(k_frames));
  return 4.0 * f1 / static_cast<double>(k_frames);
}

// Full-quadrant angle in (-pi, pi]. Empty when F1 is zero.
inline std::optional<double> phase(Complex f1) {
  if (f1 == Complex{0.0, 0.0}) return std::nullopt;
  double a = std::atan2(f1.imag(), f1.real());
  if (a <= -std::numbers::pi) a = std::numbers::pi;
  return a;
}

// Per-frame spatial mean of the stack.
inline std::vector<double> mean_series(const FrameStack& stack) {
  std::vector<double> out;
  out.reserve(stack.frame_count());
  for (const auto& frame : stack.frames) {
    double acc = 0.0;
    for (double v : frame.data()) acc += v;
    out.push_back(acc / static_cast<double>(frame.size()));
  }
  return out;
}

namespace detail {

inline double fit_residual(std::span<const double> y, double f) {
  return fit_sinusoid(y, f).residual_energy;
}

// Golden-section minimization of the sinusoid-fit residual over [lo, hi].
inline double polish_frequency(std::span<const double> y, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = fit_residual(y, c);
  double fd = fit_residual(y, d);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = fit_residual(y, c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = fit_residual(y, d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Fringe frequency (cycles per scan window) of the spatial-mean series.
// Coarse stage: peak of the zero-padded magnitude spectrum of the de-meaned
// series, refined by a parabola through the log-magnitudes of the three bins
// around it. The coarse value is biased by the negative-frequency image, so it
// only seeds a golden-section search for the frequency that minimizes the
// least-squares sinusoid residual within half a cycle of it.
inline double estimate_fringe_frequency(std::span<const double> series, unsigned zero_pad_factor) {
  const std::size_t k_frames = series.size();
  if (k_frames < 4)
    throw InvalidOptions("frequency estimation needs at least 4 frames; got " + std::to_string(k_frames));
  if (zero_pad_factor < 1) throw InvalidOptions("zero_pad_factor must be >= 1");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(k_frames);
  std::vector<double> ac(k_frames);
  double peak_dev = 0.0;
  for (std::size_t k = 0; k < k_frames; ++k) {
    ac[k] = series[k] - mean;
    peak_dev = std::max(peak_dev, std::abs(ac[k]));
  }
  if (!(peak_dev > 1e-12 * std::max(std::abs(mean), 1e-300)))
    throw EstimationFailure("no fringe above the noise floor: the mean series is constant");

  const std::size_t n = k_frames * zero_pad_factor;
  const std::size_t last = (n - 1) / 2;  // highest bin strictly below K/2
  std::vector<double> mag(last + 2, 0.0);
  for (std::size_t j = 0; j <= std::min(last + 1, n - 1); ++j) {
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < k_frames; ++k) acc += ac[k] * std::conj(detail::unit_phasor(k * j, n));
    mag[j] = std::abs(acc);
  }
  std::size_t peak = 1;
  for (std::size_t j = 2; j <= last; ++j)
    if (mag[j] > mag[peak]) peak = j;

  double offset = 0.0;
  if (peak >= 1 && peak + 1 < mag.size() && mag[peak - 1] > 0.0 && mag[peak + 1] > 0.0) {
    const double a = std::log(mag[peak - 1]);
    const double b = std::log(mag[peak]);
    const double c = std::log(mag[peak + 1]);
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }
  const double coarse = (static_cast<double>(peak) + offset) / static_cast<double>(zero_pad_factor);

  const double nyquist = 0.5 * static_cast<double>(k_frames);
  const double margin = 1e-3;
  const double lo = std::max(coarse - 0.5, margin);
  const double hi = std::min(coarse + 0.5, nyquist - margin);
  if (!(hi > lo)) return coarse;
  return detail::polish_frequency(ac, lo, hi);
}

inline double estimate_fringe_frequency(const FrameStack& stack, unsigned zero_pad_factor) {
  if (stack.frame_count() < 4)
    throw InvalidOptions("frequency estimation needs at least 4 frames; got " +
                         std::to_string(stack.frame_count()));
  return estimate_fringe_frequency(mean_series(stack), zero_pad_factor);
}

struct FrequencyMode {
  enum class Kind {
    assume_one_cycle,  // integer bin m = 1
    estimate,          // estimate_fringe_frequency, then single-bin fit
    fixed,             // single-bin fit at `value`
    from_scan_phases,  // frequency implied by the stack's recorded scan phases
  };
  Kind kind = Kind::assume_one_cycle;
  double value = 1.0;

  static FrequencyMode one_cycle() { return {Kind::assume_one_cycle, 1.0}; }
  static FrequencyMode estimated() { return {Kind::estimate, 0.0}; }
  static FrequencyMode fixed_at(double f) { return {Kind::fixed, f}; }
  static FrequencyMode scan_phases() { return {Kind::from_scan_phases, 0.0}; }
};

inline std::string to_string(const FrequencyMode& mode) {
  switch (mode.kind) {
    case FrequencyMode::Kind::assume_one_cycle: return "one-cycle";
    case FrequencyMode::Kind::estimate: return "estimate";
    case FrequencyMode::Kind::from_scan_phases: return "scan-phases";
    case FrequencyMode::Kind::fixed: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "fixed:%.17g", mode.value);
      return buf;
    }
  }
  return "unknown";
}

// Accepts "one-cycle", "estimate", "scan-phases", "fixed:<f>" or a bare number.
inline FrequencyMode parse_frequency_mode(const std::string& text) {
  if (text == "one-cycle" || text == "assume-one-cycle") return FrequencyMode::one_cycle();
  if (text == "estimate") return FrequencyMode::estimated();
  if (text == "scan-phases") return FrequencyMode::scan_phases();
  std::string number = text.rfind("fixed:", 0) == 0 ? text.substr(6) : text;
  try {
    std::size_t used = 0;
    const double f = std::stod(number, &used);
    if (used == number.size()) return FrequencyMode::fixed_at(f);
  } catch (const std::exception&) {
  }
  throw InvalidOptions("unknown frequency mode '" + text + "'");
}

struct ExtractionOptions {
  FrequencyMode frequency_mode = FrequencyMode::one_cycle();
  unsigned zero_pad_factor = 8;
  double min_dc_threshold = 1e-9;  // counts; dimmer pixels are masked
  unsigned workers = 1;            // 0 = one per hardware thread
};

// Bits of AnalysisResult::mask.
enum MaskBits : std::uint8_t {
  kVisibilityMasked = 1u << 0,  // dc below threshold
  kPhaseMasked = 1u << 1,       // fundamental vanishes or dc below threshold
};

// Leakage fraction above which AnalysisResult::leakage_flag is raised.
inline constexpr double kLeakageFlagThreshold = 0.05;

// |X1| at or below this fraction of X0 leaves the phase undefined.
inline constexpr double kPhaseFloor = 1e-12;

struct AnalysisResult {
  ImageD visibility;
  ImageD contrast;
  ImageD phase;
  ImageD dc;  // mean counts, X0 / K
  Image<std::uint8_t> mask;
  double fringe_frequency = 1.0;
  // Share of the spatial-mean series' AC energy left unexplained by the
  // extracted component.
  double leakage_fraction = 0.0;
  bool leakage_flag = false;
  std::size_t frame_count = 0;
};

// Fringe frequency implied by uniformly stepped scan phases.
inline double frequency_from_scan_phases(std::span<const double> phases) {
  const std::size_t k_frames = phases.size();
  if (k_frames < 2) throw InvalidOptions("scan-phase frequency needs at least 2 frames");
  const double step = (phases.back() - phases.front()) / static_cast<double>(k_frames - 1);
  for (std::size_t k = 1; k < k_frames; ++k)
    if (std::abs((phases[k] - phases[k - 1]) - step) > 1e-6)
      throw InvalidOptions("scan phases are not uniformly stepped");
  return static_cast<double>(k_frames) * step / (2.0 * std::numbers::pi);
}

namespace detail {

inline Projection choose_projection(const FrameStack& stack, const ExtractionOptions& options) {
  const std::size_t k_frames = stack.frame_count();
  switch (options.frequency_mode.kind) {
    case FrequencyMode::Kind::assume_one_cycle:
      return Projection::dft_bin(k_frames, 1);
    case FrequencyMode::Kind::fixed: {
      const double f = options.frequency_mode.value;
      if (!(f > 0.0)) throw InvalidOptions("fixed fringe frequency must be positive");
      return Projection::least_squares(k_frames, f);
    }
    case FrequencyMode::Kind::estimate:
      if (k_frames < 4)
        throw InvalidOptions("frequency_mode=estimate needs at least 4 frames; got " +
                             std::to_string(k_frames));
      return Projection::least_squares(k_frames, estimate_fringe_frequency(stack, options.zero_pad_factor));
    case FrequencyMode::Kind::from_scan_phases: {
      const double f = frequency_from_scan_phases(stack.scan_phases);
      if (std::abs(f - 1.0) < 1e-9) return Projection::dft_bin(k_frames, 1);
      if (!(f > 0.0)) throw InvalidOptions("scan phases must increase");
      return Projection::least_squares(k_frames, f);
    }
  }
  throw InvalidOptions("unhandled frequency mode");
}

inline double leakage_fraction(const FrameStack& stack, const Projection& proj) {
  const std::vector<double> y = mean_series(stack);
  const double kd = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= kd;
  double ac = 0.0;
  for (double v : y) ac += (v - mean) * (v - mean);
  if (!(ac > 1e-24 * std::max(mean * mean, 1e-300))) return 0.0;

  // Energy of the fitted fringe A + Re[c e^{it}] about the mean, on the same
  // frames, compared with the series' own AC energy.
  const double a0 = proj.dc(y) / kd;
  const Complex c = proj.fundamental(y) * (2.0 / kd);
  double resid = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double t = 2.0 * std::numbers::pi * proj.frequency * static_cast<double>(k) / kd;
    const double model = a0 + c.real() * std::cos(t) - c.imag() * std::sin(t);
    resid += (y[k] - model) * (y[k] - model);
  }
  return std::clamp(resid / ac, 0.0, 1.0);
}

}  // namespace detail

// Reduces the stack to visibility, contrast, phase and DC maps. Rows are
// processed independently, so the output does not depend on options.workers.
inline AnalysisResult analyze_stack(const FrameStack& stack, const ExtractionOptions& options = {}) {
  const std::size_t k_frames = stack.frame_count();
  if (k_frames < 3)
    throw NyquistViolation("at least 3 frames are required per fringe period (Nyquist limit); got " +
                           std::to_string(k_frames));
  if (options.zero_pad_factor < 1) throw InvalidOptions("zero_pad_factor must be >= 1");
  if (!(options.min_dc_threshold >= 0.0)) throw InvalidOptions("min_dc_threshold must be >= 0");
  stack.validate();

  const Projection proj = detail::choose_projection(stack, options);
  const std::size_t width = stack.width();
  const std::size_t height = stack.height();
  const double kd = static_cast<double>(k_frames);

  AnalysisResult result;
  result.visibility = ImageD(width, height);
  result.contrast = ImageD(width, height);
  result.phase = ImageD(width, height);
  result.dc = ImageD(width, height);
  result.mask = Image<std::uint8_t>(width, height);
  result.fringe_frequency = proj.frequency;
  result.frame_count = k_frames;

  parallel_rows(height, options.workers, [&](std::size_t row_begin, std::size_t row_end) {
    std::vector<double> x0(width), re(width), im(width);
    for (std::size_t y = row_begin; y < row_end; ++y) {
      std::fill(x0.begin(), x0.end(), 0.0);
      std::fill(re.begin(), re.end(), 0.0);
      std::fill(im.begin(), im.end(), 0.0);
      for (std::size_t k = 0; k < k_frames; ++k) {
        const auto src = stack.frames[k].row(y);
        const double w0 = proj.w0[k], wr = proj.w_re[k], wi = proj.w_im[k];
        for (std::size_t x = 0; x < width; ++x) {
          x0[x] += w0 * src[x];
          re[x] += wr * src[x];
          im[x] += wi * src[x];
        }
      }
      auto vis = result.visibility.row(y);
      auto con = result.contrast.row(y);
      auto pha = result.phase.row(y);
      auto dcm = result.dc.row(y);
      auto msk = result.mask.row(y);
      for (std::size_t x = 0; x < width; ++x) {
        const Complex f1c{re[x], im[x]};
        const double f0 = x0[x];
        const double f1 = std::abs(f1c);
        const double dc = std::max(f0 / kd, 0.0);
        std::uint8_t flags = 0;
        dcm[x] = dc;
        con[x] = contrast(f1, k_frames);
        const bool dark = !(dc >= options.min_dc_threshold) || !(f0 > 0.0);
        if (dark) {
          flags |= kVisibilityMasked | kPhaseMasked;
          vis[x] = 0.0;
          pha[x] = 0.0;
        } else {
          vis[x] = *visibility(f0, f1);
          const auto ph = f1 > kPhaseFloor * f0 ? phase(f1c) : std::nullopt;
          if (ph) {
            pha[x] = *ph;
          } else {
            flags |= kPhaseMasked;
            pha[x] = 0.0;
          }
        }
        msk[x] = flags;
      }
    }
  });

  result.leakage_fraction = detail::leakage_fraction(stack, proj);
  result.leakage_flag = result.leakage_fraction > kLeakageFlagThreshold;
  return result;
}

}  // namespace iup::fringe
