#pragma once

// Wall-clock cost of map extraction versus frame count. Each stack is
// synthesized once outside the timed region; only analyze_stack is timed.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "iup/errors.hpp"
#include "iup/fringe_analysis.hpp"
#include "iup/interferometer.hpp"
#include "iup/keyvalue.hpp"
#include "iup/targets.hpp"

namespace iup::bench {

struct BenchRow {
  std::size_t frames = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::size_t runs = 0;
  unsigned threads = 1;
  std::size_t width = 0;
  std::size_t height = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string machine;
};

inline std::string machine_descriptor() {
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = trim(line.substr(colon + 1));
      break;
    }
  }
  std::string compiler = "unknown compiler";
#if defined(__clang__)
  compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  compiler = "gcc " __VERSION__;
#endif
  return cpu + ", " + std::to_string(std::thread::hardware_concurrency()) + " hardware threads, " + compiler;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Sample mean and (n-1) standard deviation.
inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return r;
}

inline constexpr int kWarmupRuns = 3;

// Times one already-synthesized stack.
inline BenchRow time_stack(const FrameStack& stack, std::size_t runs, unsigned threads) {
  fringe::ExtractionOptions options;
  options.workers = threads;
  for (int i = 0; i < kWarmupRuns; ++i) (void)fringe::analyze_stack(stack, options);
  std::vector<double> times;
  times.reserve(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = fringe::analyze_stack(stack, options);
    const auto t1 = std::chrono::steady_clock::now();
    if (result.frame_count != stack.frame_count()) throw Error("benchmark analysis returned a malformed result");
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  const MeanStd ms = mean_std(times);
  return {stack.frame_count(), ms.mean, ms.std, runs, threads, stack.width(), stack.height()};
}

inline BenchReport run_bench(std::size_t width, std::size_t height, const std::vector<std::size_t>& frame_counts,
                             std::size_t runs, unsigned threads) {
  if (runs < 2) throw InvalidInput("bench needs at least 2 runs to report a standard deviation");
  if (width == 0 || height == 0) throw InvalidInput("bench geometry must be positive");
  if (frame_counts.empty()) throw InvalidInput("bench needs at least one frame count");
  for (std::size_t k : frame_counts)
    if (k < 3)
      throw NyquistViolation("bench frame count " + std::to_string(k) + " is below the 3-frame Nyquist minimum");

  sim::OpticalConfig config;
  config.sensor.width = width;
  config.sensor.height = height;
  const auto scene = sim::make_test_target(sim::TargetKind::ring_electrode, width, height);
  const sim::Renderer renderer(scene, config, sim::NoiseModel::none(), threads);

  BenchReport report;
  report.machine = machine_descriptor();
  for (std::size_t k : frame_counts) {
    FrameStack stack;
    for (std::size_t i = 0; i < k; ++i) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
      stack.scan_phases.push_back(phase);
      stack.frames.push_back(renderer.expected(phase));
    }
    report.rows.push_back(time_stack(stack, runs, resolve_workers(threads)));
  }
  return report;
}

inline constexpr const char* kCsvHeader = "K,mean_ms,std_ms,runs,threads,width,height";

inline std::string to_csv(const std::vector<BenchRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%zu,%u,%zu,%zu\n", r.frames, r.mean_ms, r.std_ms, r.runs, r.threads,
                  r.width, r.height);
    out += buf;
  }
  return out;
}

inline std::vector<BenchRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) throw ValidationError("bench CSV: unexpected header");
  std::vector<BenchRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_list(line);
    if (f.size() != 7) throw ValidationError("bench CSV: expected 7 columns in '" + line + "'");
    BenchRow r;
    r.frames = static_cast<std::size_t>(parse_int(f[0], "K"));
    r.mean_ms = parse_double(f[1], "mean_ms");
    r.std_ms = parse_double(f[2], "std_ms");
    r.runs = static_cast<std::size_t>(parse_int(f[3], "runs"));
    r.threads = static_cast<unsigned>(parse_int(f[4], "threads"));
    r.width = static_cast<std::size_t>(parse_int(f[5], "width"));
    r.height = static_cast<std::size_t>(parse_int(f[6], "height"));
    rows.push_back(r);
  }
  return rows;
}

inline std::string format_table(const BenchReport& report) {
  std::string out = "machine: " + report.machine + "\n";
  out += "    K     mean (ms)      std (ms)   runs  threads  geometry\n";
  char buf[160];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%5zu  %12.3f  %12.3f  %5zu  %7u  %zux%zu\n", r.frames, r.mean_ms, r.std_ms, r.runs,
                  r.threads, r.width, r.height);
    out += buf;
  }
  return out;
}

}  // namespace iup::bench
