#pragma once

// Signal/idler wavelengths of collinear, first-order quasi-phase-matched
// down-conversion in periodically poled lithium niobate (all waves
// extraordinary). Energy conservation fixes the idler from the signal; the
// signal is the root of the wave-vector mismatch
//
//   dk = 2*pi * (n_p/l_p - n_s/l_s - n_i/l_i - 1/poling_period)
//
// on the branch with signal <= 2 * pump (signal is the shorter wavelength).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "iup/errors.hpp"
#include "iup/keyvalue.hpp"
#include "iup/parallel.hpp"

namespace iup::qpm {

// Temperature-dependent Sellmeier of the form
//   n^2 = a1 + b1*f + (a2 + b2*f)/(l^2 - (a3 + b3*f)^2)
//             + (a4 + b4*f)/(l^2 - a5^2) - a6*l^2
//   f = (T - t_ref)*(T + t_offset), l in micrometres, T in Celsius.
struct DispersionSet {
  std::string name;
  std::string citation;
  double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0;
  double b1 = 0, b2 = 0, b3 = 0, b4 = 0;
  double reference_temperature_C = 24.5;
  double thermal_offset_C = 570.82;
  double wavelength_min_nm = 0;
  double wavelength_max_nm = 0;
  double temperature_min_C = 0;
  double temperature_max_C = 0;

  static DispersionSet from_keyvalue(const KeyValueDoc& doc) {
    if (doc.get_or("form", "temperature-sellmeier") != "temperature-sellmeier")
      throw ValidationError("unsupported dispersion form '" + doc.get("form") + "'");
    DispersionSet d;
    d.name = doc.get("name");
    d.citation = doc.get_or("citation", "");
    d.a1 = doc.get_double("a1");
    d.a2 = doc.get_double("a2");
    d.a3 = doc.get_double("a3");
    d.a4 = doc.get_double("a4");
    d.a5 = doc.get_double("a5");
    d.a6 = doc.get_double("a6");
    d.b1 = doc.get_double("b1");
    d.b2 = doc.get_double("b2");
    d.b3 = doc.get_double("b3");
    d.b4 = doc.get_double("b4");
    d.reference_temperature_C = doc.get_double("reference_temperature_C");
    d.thermal_offset_C = doc.get_double("thermal_offset_C");
    d.wavelength_min_nm = doc.get_double("wavelength_min_nm");
    d.wavelength_max_nm = doc.get_double("wavelength_max_nm");
    d.temperature_min_C = doc.get_double("temperature_min_C");
    d.temperature_max_C = doc.get_double("temperature_max_C");
    if (!(d.wavelength_min_nm > 0 && d.wavelength_max_nm > d.wavelength_min_nm))
      throw ValidationError("dispersion set '" + d.name + "' has an empty wavelength window");
    if (!(d.temperature_max_C > d.temperature_min_C))
      throw ValidationError("dispersion set '" + d.name + "' has an empty temperature window");
    return d;
  }

  static DispersionSet load(const std::string& path) { return from_keyvalue(KeyValueDoc::load(path)); }

  bool covers_wavelength(double nm) const { return nm >= wavelength_min_nm && nm <= wavelength_max_nm; }
  bool covers_temperature(double c) const { return c >= temperature_min_C && c <= temperature_max_C; }
};

// 5 mol% MgO-doped congruent lithium niobate, extraordinary index
// (Gayer et al., Appl. Phys. B 91, 343 (2008)). Mirrors
// data/dispersion/mgo_cln_gayer2008.txt.
inline DispersionSet mgo_cln_gayer2008() {
  DispersionSet d;
  d.name = "mgo_cln_gayer2008";
  d.citation = "O. Gayer, Z. Sacks, E. Galun, A. Arie, Appl. Phys. B 91, 343-348 (2008)";
  d.a1 = 5.756;
  d.a2 = 0.0983;
  d.a3 = 0.2020;
  d.a4 = 189.32;
  d.a5 = 12.52;
  d.a6 = 1.32e-2;
  d.b1 = 2.860e-6;
  d.b2 = 4.700e-8;
  d.b3 = 6.113e-8;
  d.b4 = 1.516e-4;
  d.reference_temperature_C = 24.5;
  d.thermal_offset_C = 570.82;
  d.wavelength_min_nm = 500.0;
  d.wavelength_max_nm = 4000.0;
  d.temperature_min_C = 20.0;
  d.temperature_max_C = 200.0;
  return d;
}

inline double refractive_index(double wavelength_nm, double temperature_C, const DispersionSet& set) {
  if (!set.covers_wavelength(wavelength_nm))
    throw RangeError("wavelength " + format_double(wavelength_nm) + " nm outside the " + set.name + " window [" +
                     format_double(set.wavelength_min_nm) + ", " + format_double(set.wavelength_max_nm) + "] nm");
  if (!set.covers_temperature(temperature_C))
    throw RangeError("temperature " + format_double(temperature_C) + " C outside the " + set.name + " window [" +
                     format_double(set.temperature_min_C) + ", " + format_double(set.temperature_max_C) + "] C");
  const double l = wavelength_nm * 1e-3;
  const double l2 = l * l;
  const double f = (temperature_C - set.reference_temperature_C) * (temperature_C + set.thermal_offset_C);
  const double pole = set.a3 + set.b3 * f;
  const double n2 = set.a1 + set.b1 * f + (set.a2 + set.b2 * f) / (l2 - pole * pole) +
                    (set.a4 + set.b4 * f) / (l2 - set.a5 * set.a5) - set.a6 * l2;
  return std::sqrt(n2);
}

struct CrystalState {
  double poling_period_um = 7.40;  // +inf for an unpoled crystal
  double temperature_C = 24.5;
  DispersionSet dispersion = mgo_cln_gayer2008();

  void validate() const {
    if (!(poling_period_um > 0.0)) throw InvalidInput("poling period must be positive");
    if (!dispersion.covers_temperature(temperature_C))
      throw RangeError("temperature " + format_double(temperature_C) + " C outside the " + dispersion.name +
                       " window");
  }
};

struct WavelengthPair {
  double signal_nm = 0.0;  // detected
  double idler_nm = 0.0;   // undetected probe
  double residual_mismatch = 0.0;  // |dk| at the solution, 1/um
  bool degenerate = false;
};

inline double idler_from_signal(double pump_nm, double signal_nm) {
  if (!(pump_nm > 0.0)) throw InvalidInput("pump wavelength must be positive");
  if (!(signal_nm > pump_nm)) throw InvalidInput("signal wavelength must exceed the pump wavelength");
  return 1.0 / (1.0 / pump_nm - 1.0 / signal_nm);
}

// Signed collinear mismatch in 1/um, idler fixed by energy conservation.
inline double qpm_mismatch(double pump_nm, double signal_nm, const CrystalState& crystal) {
  crystal.validate();
  const double idler_nm = idler_from_signal(pump_nm, signal_nm);
  const auto& d = crystal.dispersion;
  const double t = crystal.temperature_C;
  const double kp = refractive_index(pump_nm, t, d) / (pump_nm * 1e-3);
  const double ks = refractive_index(signal_nm, t, d) / (signal_nm * 1e-3);
  const double ki = refractive_index(idler_nm, t, d) / (idler_nm * 1e-3);
  const double grating = std::isinf(crystal.poling_period_um) ? 0.0 : 1.0 / crystal.poling_period_um;
  return 2.0 * std::numbers::pi * (kp - ks - ki - grating);
}

// Signal wavelengths for which pump, signal and idler all sit inside the
// dispersion window, capped at degeneracy.
struct SignalWindow {
  double lo_nm = 0.0;
  double hi_nm = 0.0;
};

inline SignalWindow signal_window(double pump_nm, const DispersionSet& d) {
  if (!d.covers_wavelength(pump_nm))
    throw RangeError("pump " + format_double(pump_nm) + " nm outside the " + d.name + " window");
  const double degenerate = 2.0 * pump_nm;
  // idler <= wavelength_max  <=>  signal >= 1/(1/pump - 1/wavelength_max)
  // (nudged inward so the idler round-trips below the window edge).
  double lo = d.wavelength_max_nm > pump_nm
                  ? (1.0 + 1e-12) / (1.0 / pump_nm - 1.0 / d.wavelength_max_nm)
                  : std::numeric_limits<double>::infinity();
  lo = std::max({lo, d.wavelength_min_nm, std::nextafter(pump_nm, degenerate)});
  const double hi = std::min(degenerate, d.wavelength_max_nm);
  if (!(hi > lo)) throw RangeError("no signal wavelength keeps all three waves inside the " + d.name + " window");
  return {lo, hi};
}

inline constexpr double kScanStepNm = 0.5;
inline constexpr double kDegenerateTolerance = 1e-6;  // 1/um

namespace detail {

// Illinois-modified regula falsi on a sign-changing bracket, falling back to
// bisection whenever the secant step stalls.
template <typename Fn>
double refine_root(Fn&& f, double a, double b, double fa, double fb) {
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(b - a) <= 1e-10 * std::max(1.0, std::abs(a))) break;
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0.0) return c;
    if ((fc > 0) == (fb > 0)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == +1) fb *= 0.5;
      side = +1;
    }
    if (it % 8 == 7) {
      // Guaranteed progress.
      const double m = 0.5 * (a + b);
      const double fm = f(m);
      if (fm == 0.0) return m;
      if ((fm > 0) == (fa > 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
        fb = fm;
      }
      side = 0;
    }
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

}  // namespace detail

inline WavelengthPair make_pair(double pump_nm, double signal_nm, const CrystalState& crystal) {
  WavelengthPair p;
  p.signal_nm = signal_nm;
  p.idler_nm = idler_from_signal(pump_nm, signal_nm);
  p.residual_mismatch = std::abs(qpm_mismatch(pump_nm, signal_nm, crystal));
  p.degenerate = signal_nm == 2.0 * pump_nm;
  return p;
}

// Scans the signal window in 0.5 nm steps for a sign change of the mismatch
// and refines the first bracket found. A tangent root at degeneracy is
// accepted when the mismatch there is within kDegenerateTolerance.
inline WavelengthPair solve_signal_idler(double pump_nm, const CrystalState& crystal) {
  crystal.validate();
  const SignalWindow window = signal_window(pump_nm, crystal.dispersion);
  const auto mismatch = [&](double s) { return qpm_mismatch(pump_nm, s, crystal); };

  double prev_s = window.lo_nm;
  double prev_v = mismatch(prev_s);
  double lowest = prev_v, highest = prev_v;
  if (prev_v == 0.0) return make_pair(pump_nm, prev_s, crystal);
  const auto steps = static_cast<std::size_t>(std::ceil((window.hi_nm - window.lo_nm) / kScanStepNm));
  for (std::size_t i = 1; i <= steps; ++i) {
    const double s = i == steps ? window.hi_nm : window.lo_nm + static_cast<double>(i) * kScanStepNm;
    const double v = mismatch(s);
    lowest = std::min(lowest, v);
    highest = std::max(highest, v);
    if (v == 0.0) return make_pair(pump_nm, s, crystal);
    if ((v > 0.0) != (prev_v > 0.0)) {
      const double root = detail::refine_root(mismatch, prev_s, s, prev_v, v);
      return make_pair(pump_nm, root, crystal);
    }
    prev_s = s;
    prev_v = v;
  }
  if (window.hi_nm == 2.0 * pump_nm && std::abs(prev_v) <= kDegenerateTolerance)
    return make_pair(pump_nm, window.hi_nm, crystal);

  std::ostringstream msg;
  msg << "no phase matching for period " << format_double(crystal.poling_period_um) << " um at "
      << format_double(crystal.temperature_C) << " C: mismatch spans [" << lowest << ", " << highest
      << "] 1/um over signal " << format_double(window.lo_nm) << "-" << format_double(window.hi_nm) << " nm";
  throw NoPhaseMatching(msg.str());
}

struct TuningCell {
  double poling_period_um = 0.0;
  double temperature_C = 0.0;
  std::optional<WavelengthPair> pair;  // empty: no phase matching
  std::string failure;
};

// One cell per (period, temperature), ordered by period then temperature.
inline std::vector<TuningCell> tuning_curve(double pump_nm, std::vector<double> periods_um,
                                            std::vector<double> temperatures_C,
                                            const DispersionSet& dispersion = mgo_cln_gayer2008(),
                                            unsigned workers = 1) {
  if (periods_um.empty() || temperatures_C.empty()) throw InvalidInput("tuning grid is empty");
  std::sort(periods_um.begin(), periods_um.end());
  std::sort(temperatures_C.begin(), temperatures_C.end());
  std::vector<TuningCell> cells;
  cells.reserve(periods_um.size() * temperatures_C.size());
  for (double p : periods_um)
    for (double t : temperatures_C) cells.push_back({p, t, std::nullopt, {}});

  parallel_rows(cells.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto& cell = cells[i];
      try {
        cell.pair = solve_signal_idler(pump_nm, CrystalState{cell.poling_period_um, cell.temperature_C, dispersion});
      } catch (const NoPhaseMatching& err) {
        cell.failure = err.what();
      } catch (const RangeError& err) {
        cell.failure = err.what();
      }
    }
  });
  return cells;
}

inline void write_tuning_csv(std::ostream& out, const std::vector<TuningCell>& cells) {
  out << "poling_period_um,temperature_C,signal_nm,idler_nm,residual\n";
  char buf[160];
  for (const auto& c : cells) {
    if (c.pair) {
      std::snprintf(buf, sizeof buf, "%.4f,%.3f,%.4f,%.4f,%.3e\n", c.poling_period_um, c.temperature_C,
                    c.pair->signal_nm, c.pair->idler_nm, c.pair->residual_mismatch);
    } else {
      std::snprintf(buf, sizeof buf, "%.4f,%.3f,NA,NA,NA\n", c.poling_period_um, c.temperature_C);
    }
    out << buf;
  }
}

}  // namespace iup::qpm
