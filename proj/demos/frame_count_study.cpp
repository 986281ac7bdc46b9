// Phase and visibility error of a shot-noise-limited ring-electrode image
// versus the number of frames per fringe period.
//
//   frame_count_study [width height trials]

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "iup/iup.hpp"

int main(int argc, char** argv) {
  using namespace iup;
  const std::size_t width = argc > 2 ? std::strtoul(argv[1], nullptr, 10) : 320;
  const std::size_t height = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 256;
  const int trials = argc > 3 ? std::atoi(argv[3]) : 5;

  sim::OpticalConfig config;
  config.sensor.width = width;
  config.sensor.height = height;
  const auto scene = sim::make_test_target(sim::TargetKind::ring_electrode, width, height);
  const sim::Renderer truth(scene, config, sim::NoiseModel::none());

  std::printf("%4s  %14s  %14s\n", "K", "phase rms/rad", "visibility rms");
  for (std::size_t k : {3, 4, 8, 15}) {
    double phase_ss = 0.0, vis_ss = 0.0;
    std::size_t n = 0;
    for (int t = 0; t < trials; ++t) {
      sim::NoiseModel noise;
      noise.shot_noise = true;
      noise.rng_seed = 1000 + static_cast<std::uint64_t>(t);
      const auto stack = sim::simulate_stack(scene, config,
                                             sim::ScanPlan::one_oscillation(k, config.undetected_wavelength_nm), noise);
      const auto r = fringe::analyze_stack(stack);
      for (std::size_t i = 0; i < r.phase.size(); ++i) {
        const auto f = truth.field()[i];
        if (std::abs(f) < 0.5) continue;  // phase is meaningless behind the metal
        phase_ss += std::pow(std::remainder(r.phase[i] - std::arg(f), 2.0 * std::numbers::pi), 2);
        vis_ss += std::pow(r.visibility[i] - std::abs(f), 2);
        ++n;
      }
    }
    std::printf("%4zu  %14.5f  %14.5f\n", k, std::sqrt(phase_ss / n), std::sqrt(vis_ss / n));
  }
}
