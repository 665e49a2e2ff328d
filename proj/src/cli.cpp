#include "ptq/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptq/ablation.hpp"
#include "ptq/calibration.hpp"
#include "ptq/error.hpp"
#include "ptq/fs_util.hpp"
#include "ptq/histogram.hpp"
#include "ptq/manifest.hpp"
#include "ptq/metrics.hpp"
#include "ptq/npy.hpp"
#include "ptq/scheme.hpp"
#include "ptq/sweep.hpp"
#include "ptq/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ptq::cli {
namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig, std::string(kSeedEnv) + " is not an unsigned integer");
    }
  }
  return 0;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Adds the tool version and a hash of the resolved configuration.
json stamp(json config, const std::string& command) {
  config["command"] = command;
  config["tool_version"] = kToolVersion;
  config["config_hash"] = hex64(derive_seed(0, config.dump()));
  return config;
}

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, doc.dump(2) + "\n");
}

fs::path manifest_path_of(const fs::path& p) {
  return fs::is_directory(p) ? p / "manifest.json" : p;
}

// Inputs are identified by content, not location, so reruns elsewhere
// produce identical artifacts.
std::string content_hash(const fs::path& p) {
  return hex64(derive_seed(0, read_file(p)));
}

BreakpointMode parse_breakpoint_mode(const std::string& text) {
  if (text == "closed-form") return BreakpointMode::ClosedForm;
  if (text == "oracle") return BreakpointMode::Oracle;
  throw Error(Errc::InvalidConfig, "unknown breakpoint mode '" + text + "'");
}

Precision parse_precision(const std::string& text) {
  if (text == "f32") return Precision::F32;
  if (text == "f64") return Precision::F64;
  throw Error(Errc::InvalidConfig, "precision must be f32 or f64");
}

std::string safe_file_name(const std::string& name) {
  std::string out = name;
  for (auto& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out;
}

struct QuantOptions {
  std::string bits = "W8A8";
  std::string scheme = "piecewise";
  std::string breakpoints = "closed-form";
  double m = kDefaultBreakpointM;
  double n = kDefaultBreakpointN;

  void add_to(CLI::App* app) {
    app->add_option("--bits", bits, "WxAy bit-widths; 'fp' leaves a side unquantized")->capture_default_str();
    app->add_option("--scheme", scheme, "uniform-symmetric | uniform-asymmetric | piecewise")->capture_default_str();
    app->add_option("--breakpoints", breakpoints, "closed-form | oracle")->capture_default_str();
    app->add_option("--m", m, "breakpoint rule slope")->capture_default_str();
    app->add_option("--n", n, "breakpoint rule intercept")->capture_default_str();
  }

  QuantizerConfig resolve() const {
    QuantizerConfig c;
    c.scheme = parse_quant_scheme(scheme);
    c.bits = parse_bit_spec(bits);
    c.breakpoints = parse_breakpoint_mode(breakpoints);
    c.m = m;
    c.n = n;
    return c;
  }
};

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOptions {
  std::string manifest;
  std::string out;
  std::string strategy = "median";
  std::size_t topk = 5;
  std::size_t size = kDefaultCalibrationSize;
  std::string sampling = "uniform";
  std::size_t bins = 10;
  bool per_tensor = false;
};

int cmd_calibrate(const CalibrateOptions& o, std::uint64_t seed, std::ostream& out) {
  ClipConfig clip{parse_clip_strategy(o.strategy), o.topk};
  SamplingMode mode{parse_sampling_kind(o.sampling), seed, o.bins};
  auto manifest = load_manifest(manifest_path_of(o.manifest));
  auto selected = sample_calibration_per_tag(manifest, o.size, mode);
  auto registry = calibrate_all(manifest, selected, clip, !o.per_tensor);

  json selected_json = selected;
  json config = stamp({{"manifest_hash", content_hash(manifest_path_of(o.manifest))},
                       {"strategy", o.strategy},
                       {"k", o.topk},
                       {"size", o.size},
                       {"sampling", o.sampling},
                       {"bins", o.bins},
                       {"seed", seed},
                       {"group_by_tag", !o.per_tensor},
                       {"selected", selected_json}},
                      "calibrate");
  fs::path out_path(o.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_file_atomic(out_path, ranges_to_json(registry, config.dump()));

  for (const auto& [key, e] : registry.entries()) {
    out << key << ": r_l=" << format_real(e.r_l) << " r_u=" << format_real(e.r_u)
        << " samples=" << e.sample_count << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// quantize

struct QuantizeOptions {
  std::string manifest;
  std::string ranges;
  std::string out_dir;
  QuantOptions quant;
};

int cmd_quantize(const QuantizeOptions& o, std::uint64_t seed, std::ostream& out) {
  auto config = o.quant.resolve();
  auto manifest = load_manifest(manifest_path_of(o.manifest));
  auto ranges = load_ranges(o.ranges);
  const fs::path out_dir(o.out_dir);

  // Fail before writing anything if any activation lacks a range.
  std::vector<std::string> missing;
  if (config.bits.act_bits) {
    for (const auto& e : manifest.entries()) {
      if (e.tag != kWeightTag && !ranges.find(e.tensor_id, e.tag)) missing.push_back(e.tensor_id);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw Error(Errc::MissingRange, "no calibrated range for: " + list);
  }

  json run_config = stamp({{"manifest_hash", content_hash(manifest_path_of(o.manifest))},
                           {"ranges_hash", content_hash(o.ranges)},
                           {"seed", seed},
                           {"quantizer", config.to_json()}},
                          "quantize");

  std::vector<ManifestEntry> out_entries;
  std::size_t quantized = 0;
  for (const auto& e : manifest.entries()) {
    fs::path rel = fs::path(e.raw_path);
    if (rel.is_absolute()) rel = rel.filename();
    fs::path dest = out_dir / rel;
    fs::create_directories(dest.parent_path());

    bool is_weight = e.tag == kWeightTag;
    std::optional<int> bits = is_weight ? config.bits.weight_bits : config.bits.act_bits;
    json params;
    if (!bits) {
      if (!fs::exists(e.path)) {
        throw Error(Errc::MissingTensorFile, "tensor '" + e.tensor_id + "' at " + e.path.string());
      }
      write_file_atomic(dest, read_file(e.path));
      params = {{"scheme", "fp"}};
    } else {
      Tensor t = manifest.load_tensor(e.tensor_id);
      QuantOutcome q = is_weight ? quantize_weight(t, *bits)
                                 : quantize_activation(t, *ranges.find(e.tensor_id, e.tag), *bits, config);
      save_npy(q.tensor, dest, t.dtype_origin());
      params = std::move(q.params);
      ++quantized;
    }
    json sidecar = {{"tensor_id", e.tensor_id}, {"tag", e.tag}, {"params", params}, {"config", run_config}};
    fs::path sidecar_path = dest;
    sidecar_path += ".params.json";
    write_json(sidecar_path, sidecar);
    out_entries.push_back({e.tensor_id, rel, rel.generic_string(), e.tag, e.seq_len});
  }
  save_manifest(DumpManifest(std::move(out_entries), out_dir), out_dir / "manifest.json");
  out << "quantized " << quantized << " of " << manifest.entries().size() << " tensors into "
      << out_dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
  std::string original;
  std::string reconstructed;
  std::string out;
};

int cmd_analyze(const AnalyzeOptions& o, std::uint64_t seed, std::ostream& out) {
  auto original = load_manifest(manifest_path_of(o.original));
  auto recon = load_manifest(manifest_path_of(o.reconstructed));
  std::map<std::string, MetricAccumulator> per_tag;
  for (const auto& e : original.entries()) {
    if (!recon.contains(e.tensor_id)) {
      throw Error(Errc::UnknownTensorId, "'" + e.tensor_id + "' missing from reconstructed dump");
    }
    per_tag[e.tag].add(original.load_tensor(e.tensor_id), recon.load_tensor(e.tensor_id));
  }
  ErrorReport report;
  MetricAccumulator total;
  for (const auto& [tag, acc] : per_tag) {
    report.per_key[tag] = acc.result();
    total.merge(acc);
  }
  report.aggregate = total.result();
  report.config = stamp({{"original_hash", content_hash(manifest_path_of(o.original))},
                         {"reconstructed_hash", content_hash(manifest_path_of(o.reconstructed))},
                         {"seed", seed}},
                        "analyze");
  write_json(o.out, report_to_json(report));
  out << "aggregate mse=" << format_real(report.aggregate.mse)
      << " sqnr_db=" << format_real(report.aggregate.sqnr_db) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateOptions {
  std::string manifest;
  std::string ranges;
  std::string plan;
  std::string out_dir;
  QuantOptions quant;
};

int cmd_ablate(const AblateOptions& o, std::uint64_t seed, std::ostream& out) {
  auto config = o.quant.resolve();
  auto manifest = load_manifest(manifest_path_of(o.manifest));
  auto ranges = load_ranges(o.ranges);
  auto plan = load_ablation_plan(o.plan);
  auto reports = run_ablation(manifest, plan, ranges, config);

  json base = {{"manifest_hash", content_hash(manifest_path_of(o.manifest))},
              {"ranges_hash", content_hash(o.ranges)},
              {"plan_hash", content_hash(o.plan)},
              {"seed", seed}};
  json summary = json::array();
  for (auto& report : reports) {
    json cfg = base;
    cfg["quantizer"] = report.config;
    report.config = stamp(cfg, "ablate");
    write_json(fs::path(o.out_dir) / (safe_file_name(report.name) + ".json"), report_to_json(report));
    summary.push_back({{"name", report.name}, {"aggregate", metrics_to_json(report.aggregate)}});
    out << report.name << ": mse=" << format_real(report.aggregate.mse)
        << " sqnr_db=" << format_real(report.aggregate.sqnr_db) << "\n";
  }
  json cfg = base;
  cfg["quantizer"] = config.to_json();
  write_json(fs::path(o.out_dir) / "summary.json",
             {{"version", kReportVersion}, {"config", stamp(cfg, "ablate")}, {"variants", summary}});
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string manifest;
  std::string spec;
  std::string out;
  std::string json_out;
  std::vector<std::string> strategies;
  std::vector<std::size_t> k_values;
  std::vector<int> bit_widths;
  std::vector<std::string> schemes;
  std::vector<std::size_t> calib_sizes;
  std::vector<std::string> sampling_modes;
};

int cmd_sweep(const SweepOptions& o, std::uint64_t seed, bool seed_given, std::ostream& out) {
  SweepSpec spec = o.spec.empty() ? SweepSpec{} : parse_sweep_spec(read_file(o.spec));
  if (seed_given || o.spec.empty()) spec.seed = seed;
  if (!o.strategies.empty()) {
    spec.axes.strategies.clear();
    for (const auto& s : o.strategies) spec.axes.strategies.push_back(parse_clip_strategy(s));
  }
  if (!o.k_values.empty()) spec.axes.k_values = o.k_values;
  if (!o.bit_widths.empty()) spec.axes.bit_widths = o.bit_widths;
  if (!o.schemes.empty()) {
    spec.axes.schemes.clear();
    for (const auto& s : o.schemes) spec.axes.schemes.push_back(parse_quant_scheme(s));
  }
  if (!o.calib_sizes.empty()) spec.axes.calib_sizes = o.calib_sizes;
  if (!o.sampling_modes.empty()) {
    spec.axes.sampling_modes.clear();
    for (const auto& s : o.sampling_modes) spec.axes.sampling_modes.push_back(parse_sampling_kind(s));
  }

  auto manifest = load_manifest(manifest_path_of(o.manifest));
  auto table = run_sweep(manifest, spec);
  table.config = stamp({{"manifest_hash", content_hash(manifest_path_of(o.manifest))}, {"sweep", table.config}},
                       "sweep");

  fs::path csv(o.out);
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  write_file_atomic(csv, "# config " + table.config.dump() + "\n" + sweep_to_csv(table));
  if (!o.json_out.empty()) write_json(o.json_out, sweep_to_json(table));

  std::size_t failed = 0;
  for (const auto& c : table.cells) failed += c.error.empty() ? 0 : 1;
  out << table.cells.size() << " cells, " << failed << " failed\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// synth / synth-dump / histogram

struct SynthOptions {
  std::string kind = "gaussian";
  SynthSpec spec;
  std::string out;
  std::string precision = "f64";
};

int cmd_synth(SynthOptions o, std::uint64_t seed, std::ostream& out) {
  o.spec.kind = parse_synth_kind(o.kind);
  o.spec.seed = seed;
  Tensor t = synth_generate(o.spec);
  fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_npy(t, path, parse_precision(o.precision));
  json config = stamp({{"kind", o.kind},
                       {"mean", o.spec.mean},
                       {"std", o.spec.std},
                       {"left_scale", o.spec.left_scale},
                       {"right_scale", o.spec.right_scale},
                       {"low", o.spec.low},
                       {"high", o.spec.high},
                       {"n", o.spec.n},
                       {"seed", seed},
                       {"precision", o.precision}},
                      "synth");
  fs::path sidecar = path;
  sidecar += ".synth.json";
  write_json(sidecar, {{"version", 1}, {"config", config}});
  out << "wrote " << t.size() << " values to " << path.string() << "\n";
  return kOk;
}

struct SynthDumpOptions {
  std::string out_dir;
  SynthDumpSpec spec = default_dump_spec();
  std::string precision = "f32";
};

int cmd_synth_dump(SynthDumpOptions o, std::uint64_t seed, std::ostream& out) {
  o.spec.seed = seed;
  o.spec.precision = parse_precision(o.precision);
  auto manifest = write_synthetic_dump(o.spec, o.out_dir);
  out << "wrote " << manifest.entries().size() << " tensors to " << o.out_dir << "\n";
  return kOk;
}

struct HistogramOptions {
  std::string input;
  std::size_t bins = 64;
  std::string out;
};

int cmd_histogram(const HistogramOptions& o, std::ostream& out) {
  Tensor t = load_npy(o.input);
  auto h = histogram_export(t, o.bins);
  json doc = histogram_to_json(h);
  doc["version"] = 1;
  doc["config"] = stamp({{"input_hash", content_hash(o.input)}, {"bins", o.bins}}, "histogram");
  write_json(o.out, doc);
  out << "histogram of " << t.size() << " values in " << o.bins << " bins\n";
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (error_class(e.code())) {
    case ErrorClass::Usage: return kUsage;
    case ErrorClass::Numerical: return kNumerical;
    case ErrorClass::Data: break;
  }
  return kData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Post-training quantization toolkit: calibration, uniform and piecewise quantizers, error analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, std::string("RNG seed (default: $") + kSeedEnv + " or 0)");
  seed_opt->type_name("UINT");

  CalibrateOptions cal;
  auto* calibrate = app.add_subcommand("calibrate", "Estimate clipping ranges from a calibration subset");
  calibrate->add_option("--manifest", cal.manifest, "dump manifest or directory")->required();
  calibrate->add_option("--out", cal.out, "ranges JSON to write")->required();
  calibrate->add_option("--strategy", cal.strategy, "median | average")->capture_default_str();
  calibrate->add_option("--topk", cal.topk, "Top-k count")->capture_default_str();
  calibrate->add_option("--size", cal.size, "calibration set size")->capture_default_str();
  calibrate->add_option("--sampling", cal.sampling, "uniform | random | prefer-short | prefer-long")->capture_default_str();
  calibrate->add_option("--bins", cal.bins, "length bins for uniform sampling")->capture_default_str();
  calibrate->add_flag("--per-tensor", cal.per_tensor, "one range per tensor instead of per tag");

  QuantizeOptions qo;
  auto* quantize = app.add_subcommand("quantize", "Fake-quantize a dump with calibrated ranges");
  quantize->add_option("--manifest", qo.manifest, "dump manifest or directory")->required();
  quantize->add_option("--ranges", qo.ranges, "ranges JSON")->required();
  quantize->add_option("--out-dir", qo.out_dir, "output dump directory")->required();
  qo.quant.add_to(quantize);

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "Compare two dumps tensor by tensor");
  analyze->add_option("--original", ao.original, "reference dump")->required();
  analyze->add_option("--reconstructed", ao.reconstructed, "quantized dump")->required();
  analyze->add_option("--out", ao.out, "report JSON")->required();

  AblateOptions ab;
  auto* ablate = app.add_subcommand("ablate", "Leave-one-out activation quantization study");
  ablate->add_option("--manifest", ab.manifest, "dump manifest or directory")->required();
  ablate->add_option("--ranges", ab.ranges, "ranges JSON")->required();
  ablate->add_option("--plan", ab.plan, "ablation plan JSON")->required();
  ablate->add_option("--out-dir", ab.out_dir, "directory for per-variant reports")->required();
  ab.quant.add_to(ablate);

  SweepOptions so;
  auto* sweep = app.add_subcommand("sweep", "Grid over calibration and quantizer settings");
  sweep->add_option("--manifest", so.manifest, "dump manifest or directory")->required();
  sweep->add_option("--spec", so.spec, "sweep spec JSON");
  sweep->add_option("--out", so.out, "CSV table")->required();
  sweep->add_option("--json-out", so.json_out, "also write the table as JSON");
  sweep->add_option("--strategies", so.strategies)->delimiter(',');
  sweep->add_option("--k-values", so.k_values)->delimiter(',');
  sweep->add_option("--bit-widths", so.bit_widths)->delimiter(',');
  sweep->add_option("--schemes", so.schemes)->delimiter(',');
  sweep->add_option("--calib-sizes", so.calib_sizes)->delimiter(',');
  sweep->add_option("--sampling-modes", so.sampling_modes)->delimiter(',');

  SynthOptions sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic tensor");
  synth->add_option("--kind", sy.kind, "gaussian | shifted-gaussian | two-sided-asymmetric | uniform")->capture_default_str();
  synth->add_option("--mean", sy.spec.mean)->capture_default_str();
  synth->add_option("--std", sy.spec.std)->capture_default_str();
  synth->add_option("--left-scale", sy.spec.left_scale)->capture_default_str();
  synth->add_option("--right-scale", sy.spec.right_scale)->capture_default_str();
  synth->add_option("--low", sy.spec.low)->capture_default_str();
  synth->add_option("--high", sy.spec.high)->capture_default_str();
  synth->add_option("--n", sy.spec.n)->capture_default_str();
  synth->add_option("--precision", sy.precision, "f32 | f64")->capture_default_str();
  synth->add_option("--out", sy.out, "NPY file")->required();

  SynthDumpOptions sd;
  auto* synth_dump = app.add_subcommand("synth-dump", "Write a synthetic activation dump with manifest");
  synth_dump->add_option("--out-dir", sd.out_dir)->required();
  synth_dump->add_option("--sequences", sd.spec.sequences)->capture_default_str();
  synth_dump->add_option("--min-len", sd.spec.min_len)->capture_default_str();
  synth_dump->add_option("--max-len", sd.spec.max_len)->capture_default_str();
  synth_dump->add_option("--hidden", sd.spec.hidden)->capture_default_str();
  synth_dump->add_option("--weights", sd.spec.weights)->capture_default_str();
  synth_dump->add_option("--precision", sd.precision, "f32 | f64")->capture_default_str();

  HistogramOptions ho;
  auto* histogram = app.add_subcommand("histogram", "Equal-width histogram of a tensor");
  histogram->add_option("--input", ho.input)->required();
  histogram->add_option("--bins", ho.bins)->capture_default_str();
  histogram->add_option("--out", ho.out)->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsage;
  }

  try {
    bool seed_given = seed_opt->count() > 0;
    if (!seed_given) seed = default_seed();
    if (*calibrate) return cmd_calibrate(cal, seed, out);
    if (*quantize) return cmd_quantize(qo, seed, out);
    if (*analyze) return cmd_analyze(ao, seed, out);
    if (*ablate) return cmd_ablate(ab, seed, out);
    if (*sweep) return cmd_sweep(so, seed, seed_given || std::getenv(kSeedEnv), out);
    if (*synth) return cmd_synth(sy, seed, out);
    if (*synth_dump) return cmd_synth_dump(sd, seed, out);
    if (*histogram) return cmd_histogram(ho, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace ptq::cli
