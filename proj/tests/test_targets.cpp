#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"

namespace iup {
namespace {

TEST(Targets, UniformIsClearAndFlat) {
  const auto s = sim::make_test_target(sim::TargetKind::uniform, 17, 9);
  EXPECT_EQ(s.width(), 17u);
  EXPECT_EQ(s.height(), 9u);
  for (double a : s.amplitude.data()) EXPECT_EQ(a, 1.0);
  for (double p : s.phase.data()) EXPECT_EQ(p, 0.0);
  EXPECT_NO_THROW(s.validate());
}

TEST(Targets, RingElectrodeIsBinary) {
  const auto s = sim::make_test_target(sim::TargetKind::ring_electrode, 128, 96);
  std::set<double> levels(s.amplitude.data().begin(), s.amplitude.data().end());
  EXPECT_EQ(levels, (std::set<double>{0.0, 1.0}));
}

TEST(Targets, PhaseStepHasTwoLevels) {
  sim::TargetParams p;
  p.phase_step_rad = test::kPi / 4;
  const auto s = sim::make_test_target(sim::TargetKind::phase_step, 40, 20, p);
  std::set<double> levels(s.phase.data().begin(), s.phase.data().end());
  EXPECT_EQ(levels, (std::set<double>{0.0, test::kPi / 4}));
}

TEST(Targets, SmoothWingStaysPhysical) {
  const auto s = sim::make_test_target(sim::TargetKind::smooth_wing, 90, 60);
  EXPECT_NO_THROW(s.validate());
  double lo = 1.0;
  for (double a : s.amplitude.data()) lo = std::min(lo, a);
  EXPECT_LT(lo, 0.6);
}

TEST(Targets, DefaultPitchMatchesSensorPixels) {
  const sim::OpticalConfig c;
  const auto s = sim::make_test_target(sim::TargetKind::uniform, 8, 8);
  EXPECT_NEAR(s.scene_pitch_um * sim::magnification(c), c.sensor.pixel_pitch_um, 1e-12);
}

TEST(Targets, KindNamesRoundTrip) {
  for (auto k : {sim::TargetKind::ring_electrode, sim::TargetKind::smooth_wing, sim::TargetKind::phase_step,
                 sim::TargetKind::uniform})
    EXPECT_EQ(sim::parse_target_kind(sim::to_string(k)), k);
  EXPECT_THROW(sim::parse_target_kind("checkerboard"), InvalidInput);
  EXPECT_THROW(sim::make_test_target(sim::TargetKind::uniform, 0, 4), InvalidInput);
}

}  // namespace
}  // namespace iup
