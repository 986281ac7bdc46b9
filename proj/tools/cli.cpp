#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iup/iup.hpp"

namespace iup::cli {
namespace {

namespace fs = std::filesystem;

// Settings shared by every subcommand: a key/value config file, `--set`
// overrides, then dedicated flags, in increasing priority.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, const char* out_help) {
  cmd->add_option("--config", c.config_path, "Key/value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override a config key (key=value), repeatable");
  cmd->add_option("--seed", c.seed, "Noise seed");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all hardware threads)");
  cmd->add_option("--out", c.out, out_help);
}

KeyValueDoc settings_from(const Common& c) {
  KeyValueDoc doc;
  if (!c.config_path.empty()) doc = KeyValueDoc::load(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidInput("--set expects key=value, got '" + kv + "'");
    doc.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (c.seed) doc.set("seed", std::to_string(*c.seed));
  if (c.threads) doc.set("threads", std::to_string(*c.threads));
  return doc;
}

bool get_bool(const KeyValueDoc& doc, const std::string& key, bool fallback) {
  if (!doc.has(key)) return fallback;
  const std::string v = doc.get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidInput("'" + key + "' expects true or false, got '" + v + "'");
}

std::size_t get_size(const KeyValueDoc& doc, const std::string& key, std::size_t fallback) {
  const auto v = doc.get_int_or(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw InvalidInput("'" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

unsigned threads_of(const KeyValueDoc& doc) { return static_cast<unsigned>(get_size(doc, "threads", 1)); }

// "a,b,c" or an inclusive range "start:stop:step".
std::vector<double> parse_grid(const std::string& text, const std::string& what) {
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
    if (parts.size() != 3) throw InvalidInput("'" + what + "' range must be start:stop:step");
    const double start = parse_double(parts[0], what);
    const double stop = parse_double(parts[1], what);
    const double step = parse_double(parts[2], what);
    if (!(step > 0.0) || stop < start) throw InvalidInput("'" + what + "' range needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = start + static_cast<double>(i) * step;
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(item, what));
  if (out.empty()) throw InvalidInput("'" + what + "' is empty");
  return out;
}

sim::OpticalConfig optical_config(const KeyValueDoc& doc) {
  sim::OpticalConfig c;
  c.pump_wavelength_nm = doc.get_double_or("pump_nm", c.pump_wavelength_nm);
  c.detected_wavelength_nm = doc.get_double_or("detected_nm", c.detected_wavelength_nm);
  c.undetected_wavelength_nm =
      doc.has("undetected_nm") ? doc.get_double("undetected_nm")
                               : qpm::idler_from_signal(c.pump_wavelength_nm, c.detected_wavelength_nm);
  c.f_u_mm = doc.get_double_or("f_u_mm", c.f_u_mm);
  c.f_c_mm = doc.get_double_or("f_c_mm", c.f_c_mm);
  c.pump_waist_mm = doc.get_double_or("pump_waist_mm", c.pump_waist_mm);
  c.system_visibility = doc.get_double_or("system_visibility", c.system_visibility);
  c.coherence_length_mm = doc.get_double_or("coherence_length_mm", c.coherence_length_mm);
  c.path_mismatch_mm = doc.get_double_or("path_mismatch_mm", c.path_mismatch_mm);
  c.sensor.width = get_size(doc, "sensor_width", c.sensor.width);
  c.sensor.height = get_size(doc, "sensor_height", c.sensor.height);
  c.sensor.pixel_pitch_um = doc.get_double_or("pixel_pitch_um", c.sensor.pixel_pitch_um);
  c.mean_counts = doc.get_double_or("mean_counts", c.mean_counts);
  c.illumination_radius_fraction = doc.get_double_or("illumination_radius_fraction", c.illumination_radius_fraction);
  const std::string coupling = doc.get_or("coupling", "field-amplitude");
  if (coupling == "field-amplitude") {
    c.coupling = sim::VisibilityCoupling::field_amplitude;
  } else if (coupling == "intensity") {
    c.coupling = sim::VisibilityCoupling::intensity;
  } else {
    throw InvalidInput("coupling must be field-amplitude or intensity");
  }
  c.validate();
  return c;
}

void write_text_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  io::StagedWriter writer(p.has_parent_path() ? p.parent_path() : fs::path("."));
  writer.stage(p.filename().string(), io::to_bytes(text));
  writer.commit();
}

int run_target(const Common& common, const std::optional<std::string>& kind_flag,
               const std::optional<std::size_t>& width_flag, const std::optional<std::size_t>& height_flag,
               std::ostream& out) {
  KeyValueDoc doc = settings_from(common);
  if (kind_flag) doc.set("kind", *kind_flag);
  if (width_flag) doc.set("width", *width_flag);
  if (height_flag) doc.set("height", *height_flag);
  if (common.out.empty()) throw InvalidInput("target needs --out <directory>");

  const auto kind = sim::parse_target_kind(doc.get_or("kind", "ring-electrode"));
  sim::TargetParams params;
  params.ring_period_px = doc.get_double_or("ring_period_px", params.ring_period_px);
  params.phase_step_rad = doc.get_double_or("phase_step_rad", params.phase_step_rad);
  params.mode = sim::parse_scene_mode(doc.get_or("mode", "transmission"));
  // Default pitch images one scene pixel onto one sensor pixel for the
  // configured optics.
  params.scene_pitch_um = doc.has("scene_pitch_um") ? doc.get_double("scene_pitch_um")
                                                    : sim::matched_scene_pitch_um(optical_config(doc));
  const auto scene = sim::make_test_target(kind, get_size(doc, "width", 1280), get_size(doc, "height", 1024), params);
  const auto path = io::write_scene(scene, common.out, sim::to_string(kind));
  out << "wrote " << sim::to_string(kind) << " scene " << scene.width() << "x" << scene.height() << " to "
      << path.string() << "\n";
  return 0;
}

int run_simulate(const Common& common, const std::string& scene_path, const std::optional<std::size_t>& frames_flag,
                 std::ostream& out) {
  KeyValueDoc doc = settings_from(common);
  if (frames_flag) doc.set("frames", *frames_flag);
  if (common.out.empty()) throw InvalidInput("simulate needs --out <directory>");

  const auto config = optical_config(doc);
  const auto scene = io::read_scene(scene_path);
  const auto plan = sim::ScanPlan::one_oscillation(get_size(doc, "frames", 15), config.undetected_wavelength_nm,
                                                   doc.get_double_or("exposure_ms", 200.0));
  sim::NoiseModel noise;
  noise.shot_noise = get_bool(doc, "shot_noise", true);
  noise.read_noise_sigma = doc.get_double_or("read_noise_sigma", 0.0);
  noise.dark_offset = doc.get_double_or("dark_offset", 0.0);
  noise.rng_seed = static_cast<std::uint64_t>(doc.get_int_or("seed", 0));

  const auto stack = sim::simulate_stack(scene, config, plan, noise, threads_of(doc));
  io::StackWriteOptions wopts;
  if (doc.has("gain")) wopts.gain = doc.get_double("gain");
  const auto manifest = io::write_stack(stack, common.out, wopts);
  out << "wrote " << stack.frame_count() << " frames " << stack.width() << "x" << stack.height() << " to "
      << manifest.string() << "\n";
  return 0;
}

int run_analyze(const Common& common, const std::string& stack_path, const std::optional<std::size_t>& frames_used,
                const std::optional<std::string>& mode_flag, const std::optional<unsigned>& zero_pad, bool no_preview,
                std::ostream& out) {
  KeyValueDoc doc = settings_from(common);
  if (frames_used) doc.set("frames_used", *frames_used);
  if (mode_flag) doc.set("frequency_mode", *mode_flag);
  if (zero_pad) doc.set("zero_pad", static_cast<std::size_t>(*zero_pad));
  if (no_preview) doc.set("preview", "false");
  if (common.out.empty()) throw InvalidInput("analyze needs --out <directory>");

  FrameStack stack = io::read_stack(stack_path);
  if (doc.has("frames_used")) stack = truncate_frames(stack, get_size(doc, "frames_used", 0));

  fringe::ExtractionOptions options;
  options.frequency_mode = fringe::parse_frequency_mode(doc.get_or("frequency_mode", "scan-phases"));
  options.zero_pad_factor = static_cast<unsigned>(get_size(doc, "zero_pad", 8));
  options.min_dc_threshold = doc.get_double_or("min_dc_threshold", options.min_dc_threshold);
  options.workers = threads_of(doc);

  const auto result = fringe::analyze_stack(stack, options);
  io::export_maps(result, common.out, get_bool(doc, "preview", true), options);

  double vis_sum = 0.0;
  std::size_t vis_n = 0;
  for (std::size_t i = 0; i < result.visibility.size(); ++i)
    if (!(result.mask[i] & fringe::kVisibilityMasked)) {
      vis_sum += result.visibility[i];
      ++vis_n;
    }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "analyzed %zu frames %zux%zu: fringe frequency %.6f cycles/scan, mean visibility %.6f, leakage %.4f%s\n",
                result.frame_count, result.visibility.width(), result.visibility.height(), result.fringe_frequency,
                vis_n ? vis_sum / static_cast<double>(vis_n) : 0.0, result.leakage_fraction,
                result.leakage_flag ? " (flagged)" : "");
  out << buf;
  return 0;
}

int run_tune(const Common& common, const std::optional<double>& pump, const std::optional<std::string>& periods,
             const std::optional<std::string>& temps, const std::optional<std::string>& dispersion_file,
             std::ostream& out) {
  KeyValueDoc doc = settings_from(common);
  if (pump) doc.set("pump_nm", *pump);
  if (periods) doc.set("periods", *periods);
  if (temps) doc.set("temperatures", *temps);
  if (dispersion_file) doc.set("dispersion_file", *dispersion_file);

  const auto dispersion =
      doc.has("dispersion_file") ? qpm::DispersionSet::load(doc.get("dispersion_file")) : qpm::mgo_cln_gayer2008();
  const auto cells = qpm::tuning_curve(doc.get_double_or("pump_nm", 532.0),
                                       parse_grid(doc.get_or("periods", "7.40"), "periods"),
                                       parse_grid(doc.get_or("temperatures", "24.5"), "temperatures"), dispersion,
                                       threads_of(doc));
  std::ostringstream csv;
  qpm::write_tuning_csv(csv, cells);
  if (common.out.empty()) {
    out << csv.str();
  } else {
    write_text_file(common.out, csv.str());
    std::size_t solved = 0;
    for (const auto& c : cells) solved += c.pair.has_value();
    out << "wrote " << cells.size() << " tuning cells (" << solved << " phase-matched) to " << common.out << "\n";
  }
  return 0;
}

int run_bench(const Common& common, const std::optional<std::size_t>& width, const std::optional<std::size_t>& height,
              const std::optional<std::string>& frames, const std::optional<std::size_t>& runs, std::ostream& out) {
  KeyValueDoc doc = settings_from(common);
  if (width) doc.set("width", *width);
  if (height) doc.set("height", *height);
  if (frames) doc.set("frames", *frames);
  if (runs) doc.set("runs", *runs);

  std::vector<std::size_t> counts;
  for (double k : parse_grid(doc.get_or("frames", "3,4,8,15"), "frames")) {
    if (k < 0 || k != std::floor(k)) throw InvalidInput("bench frame counts must be whole numbers");
    counts.push_back(static_cast<std::size_t>(k));
  }
  const auto report = bench::run_bench(get_size(doc, "width", 1280), get_size(doc, "height", 1024), counts,
                                       get_size(doc, "runs", 100), static_cast<unsigned>(get_size(doc, "threads", 0)));
  out << bench::format_table(report);
  if (!common.out.empty()) write_text_file(common.out, bench::to_csv(report.rows));
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Undetected-photon imaging toolkit: simulate, analyze, tune, benchmark", "iup"};
  app.require_subcommand(1);

  Common target_c, sim_c, an_c, tune_c, bench_c;

  auto* target = app.add_subcommand("target", "Generate a synthetic object scene");
  add_common(target, target_c, "Output scene directory");
  std::optional<std::string> kind;
  std::optional<std::size_t> t_width, t_height;
  target->add_option("--kind", kind, "ring-electrode | smooth-wing | phase-step | uniform");
  target->add_option("--width", t_width, "Scene width in pixels");
  target->add_option("--height", t_height, "Scene height in pixels");

  auto* simulate = app.add_subcommand("simulate", "Render a fringe-scanned frame stack from a scene");
  add_common(simulate, sim_c, "Output stack directory");
  std::string scene_path;
  std::optional<std::size_t> frames;
  simulate->add_option("--scene", scene_path, "Scene directory or scene.txt")->required();
  simulate->add_option("--frames", frames, "Frames over one fringe oscillation");

  auto* analyze = app.add_subcommand("analyze", "Extract visibility, contrast and phase maps from a stack");
  add_common(analyze, an_c, "Output map directory");
  std::string stack_path;
  std::optional<std::size_t> frames_used;
  std::optional<std::string> mode;
  std::optional<unsigned> zero_pad;
  bool no_preview = false;
  analyze->add_option("--stack", stack_path, "Stack directory or manifest")->required();
  analyze->add_option("--frames-used", frames_used, "Keep only the first N frames");
  analyze->add_option("--frequency-mode", mode, "scan-phases | one-cycle | estimate | fixed:<f>");
  analyze->add_option("--zero-pad", zero_pad, "Zero-padding factor for frequency estimation");
  analyze->add_flag("--no-preview", no_preview, "Skip 16-bit PGM previews");

  auto* tune = app.add_subcommand("tune", "Quasi-phase-matched signal/idler wavelengths");
  add_common(tune, tune_c, "Output CSV (stdout when omitted)");
  std::optional<double> pump;
  std::optional<std::string> periods, temps, dispersion;
  tune->add_option("--pump", pump, "Pump wavelength in nm");
  tune->add_option("--period", periods, "Poling periods in um: list a,b,c or range start:stop:step");
  tune->add_option("--temp", temps, "Crystal temperatures in C: list or range");
  tune->add_option("--dispersion", dispersion, "Dispersion table file")->check(CLI::ExistingFile);

  auto* benchcmd = app.add_subcommand("bench", "Time map extraction versus frame count");
  add_common(benchcmd, bench_c, "Output CSV");
  std::optional<std::size_t> b_width, b_height, runs;
  std::optional<std::string> b_frames;
  benchcmd->add_option("--width", b_width, "Frame width in pixels");
  benchcmd->add_option("--height", b_height, "Frame height in pixels");
  benchcmd->add_option("--frames", b_frames, "Frame counts, e.g. 3,4,8,15");
  benchcmd->add_option("--runs", runs, "Timed runs per frame count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return 0;
    if (e.get_name() != "RequiredError" || app.get_subcommands().empty()) err << app.help();
    return 2;
  }

  try {
    if (*target) return run_target(target_c, kind, t_width, t_height, out);
    if (*simulate) return run_simulate(sim_c, scene_path, frames, out);
    if (*analyze) return run_analyze(an_c, stack_path, frames_used, mode, zero_pad, no_preview, out);
    if (*tune) return run_tune(tune_c, pump, periods, temps, dispersion, out);
    if (*benchcmd) return run_bench(bench_c, b_width, b_height, b_frames, runs, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace iup::cli
