#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "test_support.hpp"

namespace iup {
namespace {

const qpm::DispersionSet kSet = qpm::mgo_cln_gayer2008();

TEST(IdlerFromSignal, EnergyConservation) {
  EXPECT_NEAR(qpm::idler_from_signal(532, 808), 1557.45, 0.05);
  EXPECT_NEAR(qpm::idler_from_signal(532, 1064), 1064.0, 1e-9);
  EXPECT_NEAR(qpm::idler_from_signal(532, 752), 1818.47, 0.05);
  EXPECT_THROW(qpm::idler_from_signal(532, 532), InvalidInput);
  EXPECT_THROW(qpm::idler_from_signal(532, 400), InvalidInput);
}

TEST(RefractiveIndex, NearPublishedValue) {
  EXPECT_NEAR(qpm::refractive_index(1064, 25, kSet), 2.15, 0.02);
}

TEST(RefractiveIndex, OutsideWindowIsARangeError) {
  EXPECT_THROW(qpm::refractive_index(450, 25, kSet), RangeError);
  EXPECT_THROW(qpm::refractive_index(4500, 25, kSet), RangeError);
  EXPECT_THROW(qpm::refractive_index(1064, 250, kSet), RangeError);
}

TEST(RefractiveIndex, Continuous) {
  for (double l = 500.0; l + 0.01 <= 4000.0; l += 7.3)
    EXPECT_LT(std::abs(qpm::refractive_index(l, 25, kSet) - qpm::refractive_index(l + 0.01, 25, kSet)), 1e-5) << l;
}

TEST(RefractiveIndex, ThermalTrendFollowsOwnDerivative) {
  // The sign of dn/dT at each wavelength, taken by finite difference, must
  // agree with the ordering of n between the window's end temperatures.
  for (double l : {532.0, 808.0, 1064.0, 1558.0, 2500.0}) {
    const double h = 0.01;
    const double dndt = (qpm::refractive_index(l, 100 + h, kSet) - qpm::refractive_index(l, 100 - h, kSet)) / (2 * h);
    const double span = qpm::refractive_index(l, 200, kSet) - qpm::refractive_index(l, 25, kSet);
    ASSERT_NE(dndt, 0.0);
    EXPECT_EQ(dndt > 0, span > 0) << l;
  }
}

TEST(Mismatch, UnpoledLimit) {
  qpm::CrystalState poled{1e12, 80.0, kSet};
  qpm::CrystalState unpoled{std::numeric_limits<double>::infinity(), 80.0, kSet};
  EXPECT_NEAR(qpm::qpm_mismatch(532, 900, poled), qpm::qpm_mismatch(532, 900, unpoled), 1e-9);
}

TEST(Solve, ReferenceOperatingPoints) {
  const auto a = qpm::solve_signal_idler(532, {7.40, 125.0, kSet});
  EXPECT_NEAR(a.signal_nm, 808, 15);
  EXPECT_NEAR(a.idler_nm, 1558, 15);
  EXPECT_LE(a.residual_mismatch, 1e-6);

  const auto b = qpm::solve_signal_idler(532, {7.71, 200.0, kSet});
  EXPECT_NEAR(b.signal_nm, 752, 15);
  EXPECT_NEAR(b.idler_nm, 1818, 15);
  EXPECT_LE(b.residual_mismatch, 1e-6);
}

TEST(Solve, MismatchChangesSignAcrossRoot) {
  const qpm::CrystalState c{7.40, 125.0, kSet};
  const auto p = qpm::solve_signal_idler(532, c);
  const double left = qpm::qpm_mismatch(532, p.signal_nm - 0.05, c);
  const double right = qpm::qpm_mismatch(532, p.signal_nm + 0.05, c);
  EXPECT_LT(left * right, 0.0);
}

TEST(Solve, NoPhaseMatchingReportsExtrema) {
  try {
    qpm::solve_signal_idler(532, {20.0, 25.0, kSet});
    FAIL() << "expected no phase matching";
  } catch (const NoPhaseMatching& e) {
    EXPECT_NE(std::string(e.what()).find("mismatch spans"), std::string::npos);
  }
}

TEST(Solve, TemperatureOutsideWindow) {
  EXPECT_THROW(qpm::solve_signal_idler(532, {7.4, 250.0, kSet}), RangeError);
}

// Poling period at which 1064 nm is exactly phase matched, found by a coarse
// scan over the period followed by bisection.
double degenerate_period(double temperature) {
  const auto dk = [&](double period) { return qpm::qpm_mismatch(532, 1064, {period, temperature, kSet}); };
  double lo = 5.0, flo = dk(lo);
  for (double p = 5.0 + 1e-3; p < 12.0; p += 1e-3) {
    const double fp = dk(p);
    if ((fp > 0) != (flo > 0)) {
      double hi = p;
      for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        if ((dk(m) > 0) == (flo > 0))
          lo = m;
        else
          hi = m;
      }
      return 0.5 * (lo + hi);
    }
    lo = p;
    flo = fp;
  }
  return std::nan("");
}

TEST(Solve, DegenerateOracle) {
  for (double t : {25.0, 90.0}) {
    const double period = degenerate_period(t);
    ASSERT_TRUE(std::isfinite(period));
    const auto p = qpm::solve_signal_idler(532, {period, t, kSet});
    EXPECT_NEAR(p.signal_nm, 1064.0, 0.01);
    EXPECT_NEAR(p.idler_nm, 1064.0, 0.01);
  }
}

TEST(Solve, AgreesWithFineScanOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> period(7.0, 8.6), temp(20.0, 200.0);
  int checked = 0;
  while (checked < 20) {
    const qpm::CrystalState c{period(rng), temp(rng), kSet};
    const auto w = qpm::signal_window(532, kSet);
    double root = std::nan("");
    double prev = qpm::qpm_mismatch(532, w.lo_nm, c);
    for (double s = w.lo_nm + 0.001; s <= w.hi_nm; s += 0.001) {
      const double v = qpm::qpm_mismatch(532, s, c);
      if ((v > 0) != (prev > 0)) {
        root = s - 0.0005;
        break;
      }
      prev = v;
    }
    if (std::isnan(root)) {
      EXPECT_THROW(qpm::solve_signal_idler(532, c), NoPhaseMatching);
      continue;
    }
    const auto p = qpm::solve_signal_idler(532, c);
    EXPECT_NEAR(p.signal_nm, root, 0.01) << c.poling_period_um << " um, " << c.temperature_C << " C";
    EXPECT_NEAR(1 / 532.0, 1 / p.signal_nm + 1 / p.idler_nm, 1e-12);
    ++checked;
  }
}

TEST(TuningCurve, OrderedContinuousAndEnergyConserving) {
  std::vector<double> periods;
  for (double p = 7.8; p >= 7.2 - 1e-9; p -= 0.02) periods.push_back(p);
  const auto cells = qpm::tuning_curve(532, periods, {60.0}, kSet, 2);
  ASSERT_EQ(cells.size(), periods.size());
  for (std::size_t i = 1; i < cells.size(); ++i) EXPECT_LT(cells[i - 1].poling_period_um, cells[i].poling_period_um);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    ASSERT_TRUE(cells[i].pair.has_value()) << cells[i].failure;
    const auto& p = *cells[i].pair;
    EXPECT_NEAR(1 / 532.0, 1 / p.signal_nm + 1 / p.idler_nm, 1e-12);
    if (i > 0) {
      EXPECT_LT(std::abs(p.signal_nm - cells[i - 1].pair->signal_nm), 10.0);
    }
  }
}

TEST(TuningCurve, FailuresAreCellMarkers) {
  const auto cells = qpm::tuning_curve(532, {7.4, 30.0}, {25.0}, kSet);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_TRUE(cells[0].pair.has_value());
  EXPECT_FALSE(cells[1].pair.has_value());
  EXPECT_FALSE(cells[1].failure.empty());
  std::ostringstream csv;
  qpm::write_tuning_csv(csv, cells);
  EXPECT_NE(csv.str().find("30.0000,25.000,NA,NA,NA"), std::string::npos);
  EXPECT_THROW(qpm::tuning_curve(532, {}, {25.0}, kSet), InvalidInput);
}

TEST(Dispersion, BundledFileMatchesBuiltIn) {
  const auto file = qpm::DispersionSet::load(std::string(IUP_DATA_DIR) + "/dispersion/mgo_cln_gayer2008.txt");
  for (double l : {532.0, 808.0, 1558.0, 3000.0})
    for (double t : {20.0, 125.0, 200.0})
      EXPECT_DOUBLE_EQ(qpm::refractive_index(l, t, file), qpm::refractive_index(l, t, kSet));
}

}  // namespace
}  // namespace iup
