#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "test_support.hpp"

namespace iup {
namespace {

using fringe::Complex;
using test::kPi;

// Straight evaluation of the DFT sum in long double.
Complex naive_dft(const std::vector<double>& y, std::size_t m) {
  const long double kd = static_cast<long double>(y.size());
  long double re = 0, im = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const long double t = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * m) / kd;
    re += y[k] * std::cos(t);
    im += y[k] * std::sin(t);
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

TEST(DftComponent, ConstantSeriesIsPureDc) {
  const std::vector<double> y{1, 1, 1, 1};
  const Complex x0 = fringe::dft_component(y, 0);
  EXPECT_DOUBLE_EQ(x0.real(), 4.0);
  EXPECT_DOUBLE_EQ(x0.imag(), 0.0);
}

TEST(DftComponent, FourPointFringes) {
  const Complex a = fringe::dft_component(std::vector<double>{2, 1, 0, 1}, 1);
  EXPECT_NEAR(a.real(), 2.0, 1e-15);
  EXPECT_NEAR(a.imag(), 0.0, 1e-15);
  const Complex b = fringe::dft_component(std::vector<double>{1, 0, 1, 2}, 1);
  EXPECT_NEAR(b.real(), 0.0, 1e-15);
  EXPECT_NEAR(b.imag(), 2.0, 1e-15);
}

TEST(DftComponent, EmptySeriesIsRejected) {
  EXPECT_THROW(fringe::dft_component(std::vector<double>{}, 1), InvalidInput);
}

TEST(DftComponent, MatchesNaiveSumOnRandomSeries) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (std::size_t k_frames = 1; k_frames <= 40; ++k_frames) {
    std::vector<double> y(k_frames);
    for (auto& v : y) v = u(rng);
    for (std::size_t m = 0; m < k_frames; ++m) {
      const Complex got = fringe::dft_component(y, m);
      const Complex want = naive_dft(y, m);
      EXPECT_LE(std::abs(got - want), 1e-12 * std::max(1.0, std::abs(want))) << "K=" << k_frames << " m=" << m;
    }
  }
}

TEST(SingleBinAmplitude, OnBinSinusoid) {
  const auto y = test::fringe_series(4, 3.0, 2.0, 0.0);
  const Complex c = fringe::single_bin_amplitude(y, 1.0);
  EXPECT_NEAR(std::abs(c), 2.0, 1e-12);
  EXPECT_NEAR(std::arg(c), 0.0, 1e-12);
}

TEST(SingleBinAmplitude, ConstantSeriesHasNoAmplitude) {
  const std::vector<double> y(8, 5.0);
  for (double f : {0.5, 1.0, 1.25, 3.9}) EXPECT_NEAR(std::abs(fringe::single_bin_amplitude(y, f)), 0.0, 1e-12);
}

TEST(SingleBinAmplitude, OffBinSinusoid) {
  const auto y = test::fringe_series(8, 1.0, 1.0, 0.3, 1.25);
  const Complex c = fringe::single_bin_amplitude(y, 1.25);
  EXPECT_NEAR(std::abs(c), 1.0, 1e-6);
  EXPECT_NEAR(std::arg(c), 0.3, 1e-6);
}

TEST(SingleBinAmplitude, FrequencyOutsideNyquistBandIsRejected) {
  const auto y = test::fringe_series(8, 1.0, 1.0, 0.0);
  EXPECT_THROW(fringe::single_bin_amplitude(y, 0.0), NyquistViolation);
  EXPECT_THROW(fringe::single_bin_amplitude(y, 4.0), NyquistViolation);
  EXPECT_THROW(fringe::single_bin_amplitude(y, -1.0), NyquistViolation);
}

TEST(SingleBinAmplitude, IntegerBinAgreesWithScaledDft) {
  const auto y = test::fringe_series(9, 4.0, 1.5, -2.0);
  const Complex c = fringe::single_bin_amplitude(y, 1.0);
  const Complex x1 = fringe::dft_component(y, 1) * (2.0 / 9.0);
  EXPECT_LE(std::abs(c - x1), 1e-12);
}

TEST(Visibility, Examples) {
  EXPECT_DOUBLE_EQ(*fringe::visibility(4.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(*fringe::visibility(4.0, 0.0), 0.0);
  EXPECT_FALSE(fringe::visibility(0.0, 1.0).has_value());

  const auto y = test::fringe_series(8, 2.0, 1.0, 0.7);
  EXPECT_NEAR(*fringe::visibility(std::abs(fringe::dft_component(y, 0)), std::abs(fringe::dft_component(y, 1))), 0.5,
              1e-14);
}

TEST(Contrast, Examples) {
  const std::vector<double> y{2, 1, 0, 1};
  const double f1 = std::abs(fringe::dft_component(y, 1));
  EXPECT_NEAR(fringe::contrast(f1, 4), 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(fringe::contrast(0.0, 4), 0.0);

  std::vector<double> tripled = y;
  for (auto& v : tripled) v *= 3.0;
  EXPECT_NEAR(fringe::contrast(std::abs(fringe::dft_component(tripled, 1)), 4), 6.0, 1e-14);
  EXPECT_THROW(fringe::contrast(1.0, 2), NyquistViolation);
}

TEST(Phase, Examples) {
  EXPECT_NEAR(*fringe::phase(fringe::dft_component(std::vector<double>{2, 1, 0, 1}, 1)), 0.0, 1e-15);
  EXPECT_NEAR(*fringe::phase(fringe::dft_component(std::vector<double>{1, 0, 1, 2}, 1)), kPi / 2, 1e-15);
  EXPECT_DOUBLE_EQ(*fringe::phase(Complex{-1.0, 0.0}), kPi);
  EXPECT_DOUBLE_EQ(*fringe::phase(Complex{-1.0, -0.0}), kPi);
  EXPECT_FALSE(fringe::phase(Complex{0.0, 0.0}).has_value());
}

TEST(EstimateFrequency, OnBin) {
  const auto s = test::uniform_stack(8, 10.0, 4.0, 0.4, 1.0);
  EXPECT_NEAR(fringe::estimate_fringe_frequency(s, 8), 1.0, 1e-9);
}

TEST(EstimateFrequency, OffBinWithPadding) {
  const auto s = test::uniform_stack(8, 10.0, 4.0, 0.4, 1.25);
  EXPECT_NEAR(fringe::estimate_fringe_frequency(s, 8), 1.25, 0.02);
}

TEST(EstimateFrequency, ConstantStackFails) {
  const auto s = test::uniform_stack(8, 10.0, 0.0, 0.0);
  EXPECT_THROW(fringe::estimate_fringe_frequency(s, 8), EstimationFailure);
}

TEST(FrequencyMode, ParseAndFormat) {
  using K = fringe::FrequencyMode::Kind;
  EXPECT_EQ(fringe::parse_frequency_mode("one-cycle").kind, K::assume_one_cycle);
  EXPECT_EQ(fringe::parse_frequency_mode("estimate").kind, K::estimate);
  EXPECT_EQ(fringe::parse_frequency_mode("scan-phases").kind, K::from_scan_phases);
  const auto fixed = fringe::parse_frequency_mode("fixed:1.25");
  EXPECT_EQ(fixed.kind, K::fixed);
  EXPECT_DOUBLE_EQ(fixed.value, 1.25);
  EXPECT_EQ(fringe::parse_frequency_mode(fringe::to_string(fixed)).value, 1.25);
  EXPECT_THROW(fringe::parse_frequency_mode("sideways"), InvalidOptions);
}

TEST(AnalyzeStack, NyquistLimit) {
  EXPECT_THROW(fringe::analyze_stack(test::uniform_stack(2, 5.0, 1.0, 0.0)), NyquistViolation);
  EXPECT_NO_THROW(fringe::analyze_stack(test::uniform_stack(3, 5.0, 1.0, 0.0)));
}

TEST(AnalyzeStack, EstimateModeNeedsFourFrames) {
  fringe::ExtractionOptions o;
  o.frequency_mode = fringe::FrequencyMode::estimated();
  EXPECT_THROW(fringe::analyze_stack(test::uniform_stack(3, 5.0, 1.0, 0.0), o), InvalidOptions);
  o.zero_pad_factor = 0;
  EXPECT_THROW(fringe::analyze_stack(test::uniform_stack(8, 5.0, 1.0, 0.0), o), InvalidOptions);
}

TEST(AnalyzeStack, ExactRecoveryAcrossFrameCounts) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amp(1.0, 1000.0), frac(0.0, 1.0), ph(-kPi, kPi);
  for (std::size_t k_frames = 3; k_frames <= 16; ++k_frames) {
    const double a = amp(rng), b = a * frac(rng), phi = ph(rng);
    const auto r = fringe::analyze_stack(test::uniform_stack(k_frames, a, b, phi));
    for (std::size_t i = 0; i < r.visibility.size(); ++i) {
      EXPECT_NEAR(r.visibility[i], b / a, 1e-9 * (b / a) + 1e-15);
      EXPECT_NEAR(r.contrast[i], 2.0 * b, 1e-9 * 2.0 * b + 1e-12);
      EXPECT_NEAR(test::wrap_angle(r.phase[i] - phi), 0.0, 1e-9);
      EXPECT_NEAR(r.dc[i], a, 1e-9 * a);
      EXPECT_EQ(r.mask[i], 0);
    }
    EXPECT_LT(r.leakage_fraction, 1e-12);
    EXPECT_FALSE(r.leakage_flag);
  }
}

TEST(AnalyzeStack, VisibilityIsGainInvariantAndContrastScales) {
  const auto base = fringe::analyze_stack(test::uniform_stack(5, 40.0, 10.0, 1.0));
  const auto scaled = fringe::analyze_stack(test::uniform_stack(5, 120.0, 30.0, 1.0));
  EXPECT_NEAR(scaled.visibility[0], base.visibility[0], 1e-12);
  EXPECT_NEAR(scaled.contrast[0], 3.0 * base.contrast[0], 1e-9);
}

TEST(AnalyzeStack, PhaseShiftIsEquivariant) {
  const auto a = fringe::analyze_stack(test::uniform_stack(7, 40.0, 10.0, 0.2));
  const auto b = fringe::analyze_stack(test::uniform_stack(7, 40.0, 10.0, 0.2 + 1.1));
  EXPECT_NEAR(test::wrap_angle(b.phase[0] - a.phase[0] - 1.1), 0.0, 1e-12);
}

TEST(AnalyzeStack, DarkAndFlatPixelsAreMasked) {
  auto s = test::uniform_stack(4, 10.0, 5.0, 0.0);
  for (auto& f : s.frames) {
    f(0, 0) = 0.0;  // dark
    f(1, 0) = 7.0;  // bright but unmodulated
  }
  const auto r = fringe::analyze_stack(s);
  EXPECT_EQ(r.mask(0, 0), fringe::kVisibilityMasked | fringe::kPhaseMasked);
  EXPECT_EQ(r.mask(1, 0), fringe::kPhaseMasked);
  EXPECT_NEAR(r.visibility(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(r.contrast(1, 0), 0.0, 1e-12);
  EXPECT_EQ(r.mask(2, 0), 0);
}

TEST(AnalyzeStack, LeakageLowersVisibilityUnderOneCycleAssumption) {
  const double a = 100.0, b = 60.0;
  const auto s = test::uniform_stack(15, a, b, 0.3, 1.25);
  const auto naive = fringe::analyze_stack(s);
  EXPECT_LT(naive.visibility[0], b / a);
  EXPECT_TRUE(naive.leakage_flag);

  fringe::ExtractionOptions o;
  o.frequency_mode = fringe::FrequencyMode::estimated();
  const auto fitted = fringe::analyze_stack(s, o);
  EXPECT_NEAR(fitted.fringe_frequency, 1.25, 1e-6);
  EXPECT_NEAR(fitted.visibility[0], b / a, 1e-6);
  EXPECT_LT(fitted.leakage_fraction, naive.leakage_fraction);
  EXPECT_FALSE(fitted.leakage_flag);
}

TEST(AnalyzeStack, ScanPhaseModeFollowsRecordedPhases) {
  // Three frames over 1.25 cycles: the recorded phases carry the frequency.
  const auto s = test::uniform_stack(9, 100.0, 40.0, -0.5, 1.25);
  fringe::ExtractionOptions o;
  o.frequency_mode = fringe::FrequencyMode::scan_phases();
  const auto r = fringe::analyze_stack(s, o);
  EXPECT_NEAR(r.fringe_frequency, 1.25, 1e-12);
  EXPECT_NEAR(r.visibility[0], 0.4, 1e-9);
  EXPECT_NEAR(r.phase[0], -0.5, 1e-9);

  const auto truncated = truncate_frames(test::uniform_stack(15, 100.0, 40.0, 0.8), 3);
  const auto t = fringe::analyze_stack(truncated, o);
  EXPECT_NEAR(t.fringe_frequency, 0.2, 1e-12);
  EXPECT_NEAR(t.visibility[0], 0.4, 1e-9);
  EXPECT_NEAR(t.phase[0], 0.8, 1e-9);
}

TEST(AnalyzeStack, OutputIndependentOfWorkerCount) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  FrameStack s;
  for (std::size_t k = 0; k < 6; ++k) {
    ImageD f(37, 29);
    for (auto& v : f.data()) v = u(rng);
    s.frames.push_back(f);
    s.scan_phases.push_back(2.0 * kPi * static_cast<double>(k) / 6.0);
  }
  fringe::ExtractionOptions o;
  const auto one = fringe::analyze_stack(s, o);
  for (unsigned w : {2u, 3u, 8u, 0u}) {
    o.workers = w;
    const auto many = fringe::analyze_stack(s, o);
    EXPECT_EQ(many.visibility, one.visibility);
    EXPECT_EQ(many.phase, one.phase);
    EXPECT_EQ(many.contrast, one.contrast);
    EXPECT_EQ(many.dc, one.dc);
    EXPECT_EQ(many.mask, one.mask);
  }
}

TEST(AnalyzeStack, RejectsMalformedStacks) {
  auto s = test::uniform_stack(4, 10.0, 5.0, 0.0);
  s.scan_phases.pop_back();
  EXPECT_THROW(fringe::analyze_stack(s), InvalidInput);
  auto t = test::uniform_stack(4, 10.0, 5.0, 0.0);
  t.frames[2] = ImageD(5, 3, 1.0);
  EXPECT_THROW(fringe::analyze_stack(t), InvalidInput);
}

}  // namespace
}  // namespace iup
