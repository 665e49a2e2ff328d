#include "ptq/sweep.hpp"

#include "ptq/error.hpp"
#include "ptq/synth.hpp"

using json = nlohmann::json;

namespace ptq {
namespace {

template <typename T, typename F>
std::vector<T> parse_axis(const json& doc, const char* key, std::vector<T> fallback, F convert) {
  if (!doc.contains(key)) return fallback;
  std::vector<T> out;
  for (const auto& item : doc.at(key)) out.push_back(convert(item));
  if (out.empty()) throw Error(Errc::InvalidConfig, std::string("sweep axis '") + key + "' is empty");
  return out;
}

}  // namespace

json SweepSpec::to_json() const {
  json strategies = json::array(), ks = json::array(), bits = json::array(), schemes = json::array(),
       sizes = json::array(), modes = json::array(), tags = json::array();
  for (auto s : axes.strategies) strategies.push_back(std::string(to_string(s)));
  for (auto k : axes.k_values) ks.push_back(k);
  for (auto b : axes.bit_widths) bits.push_back(b);
  for (auto s : axes.schemes) schemes.push_back(std::string(to_string(s)));
  for (auto s : axes.calib_sizes) sizes.push_back(s);
  for (auto m : axes.sampling_modes) modes.push_back(std::string(to_string(m)));
  for (const auto& t : quantize_tags) tags.push_back(t);
  return {{"strategies", strategies},
          {"k_values", ks},
          {"bit_widths", bits},
          {"schemes", schemes},
          {"calib_sizes", sizes},
          {"sampling_modes", modes},
          {"quantize_tags", tags},
          {"seed", seed},
          {"bins", bins},
          {"group_by_tag", group_by_tag},
          {"breakpoints", breakpoints == BreakpointMode::ClosedForm ? "closed-form" : "oracle"},
          {"m", m},
          {"n", n}};
}

SweepSpec parse_sweep_spec(const std::string& json_text) {
  SweepSpec spec;
  try {
    json doc = json::parse(json_text);
    spec.axes.strategies = parse_axis<ClipStrategy>(doc, "strategies", spec.axes.strategies,
        [](const json& j) { return parse_clip_strategy(j.get<std::string>()); });
    spec.axes.k_values = parse_axis<std::size_t>(doc, "k_values", spec.axes.k_values,
        [](const json& j) { return j.get<std::size_t>(); });
    spec.axes.bit_widths = parse_axis<int>(doc, "bit_widths", spec.axes.bit_widths,
        [](const json& j) { return j.get<int>(); });
    spec.axes.schemes = parse_axis<QuantScheme>(doc, "schemes", spec.axes.schemes,
        [](const json& j) { return parse_quant_scheme(j.get<std::string>()); });
    spec.axes.calib_sizes = parse_axis<std::size_t>(doc, "calib_sizes", spec.axes.calib_sizes,
        [](const json& j) { return j.get<std::size_t>(); });
    spec.axes.sampling_modes = parse_axis<SamplingKind>(doc, "sampling_modes", spec.axes.sampling_modes,
        [](const json& j) { return parse_sampling_kind(j.get<std::string>()); });
    if (doc.contains("quantize_tags")) {
      for (const auto& t : doc["quantize_tags"]) spec.quantize_tags.insert(t.get<std::string>());
    }
    spec.seed = doc.value("seed", spec.seed);
    spec.bins = doc.value("bins", spec.bins);
    spec.group_by_tag = doc.value("group_by_tag", spec.group_by_tag);
    if (doc.contains("breakpoints")) {
      auto mode = doc["breakpoints"].get<std::string>();
      if (mode == "closed-form") spec.breakpoints = BreakpointMode::ClosedForm;
      else if (mode == "oracle") spec.breakpoints = BreakpointMode::Oracle;
      else throw Error(Errc::InvalidConfig, "unknown breakpoint mode '" + mode + "'");
    }
    spec.m = doc.value("m", spec.m);
    spec.n = doc.value("n", spec.n);
  } catch (const json::exception& ex) {
    throw Error(Errc::InvalidConfig, std::string("sweep spec: ") + ex.what());
  }
  return spec;
}

std::string SweepCell::key() const {
  return std::string(to_string(strategy)) + "|k=" + std::to_string(k) + "|b=" + std::to_string(bits) +
         "|" + std::string(to_string(scheme)) + "|size=" + std::to_string(calib_size) + "|" +
         std::string(to_string(sampling));
}

SweepTable run_sweep(const LoadedDump& dump, const SweepSpec& spec) {
  const auto& a = spec.axes;
  if (a.strategies.empty() || a.k_values.empty() || a.bit_widths.empty() || a.schemes.empty() ||
      a.calib_sizes.empty() || a.sampling_modes.empty()) {
    throw Error(Errc::InvalidConfig, "every sweep axis needs at least one value");
  }
  const DumpManifest& manifest = *dump.manifest;

  std::set<std::string> tags = spec.quantize_tags;
  if (tags.empty()) {
    for (const auto& t : manifest.tags()) {
      if (t != kWeightTag) tags.insert(t);
    }
  }

  SweepTable table;
  table.config = spec.to_json();
  for (auto strategy : a.strategies)
    for (auto k : a.k_values)
      for (auto bits : a.bit_widths)
        for (auto scheme : a.schemes)
          for (auto size : a.calib_sizes)
            for (auto sampling : a.sampling_modes) {
              SweepCell cell;
              cell.strategy = strategy;
              cell.k = k;
              cell.bits = bits;
              cell.scheme = scheme;
              cell.calib_size = size;
              cell.sampling = sampling;
              cell.seed = derive_seed(spec.seed, cell.key());
              try {
                auto selected = sample_calibration_per_tag(manifest, size, {sampling, cell.seed, spec.bins});
                auto ranges = calibrate_all(manifest, selected, {strategy, k}, spec.group_by_tag);
                QuantizerConfig qc;
                qc.scheme = scheme;
                qc.bits = {std::nullopt, bits};
                qc.breakpoints = spec.breakpoints;
                qc.m = spec.m;
                qc.n = spec.n;
                AblationPlan plan{{{cell.key(), tags, std::nullopt, bits}}};
                cell.metrics = run_ablation(dump, plan, ranges, qc).front().aggregate;
              } catch (const Error& ex) {
                cell.error = ex.what();
              }
              table.cells.push_back(std::move(cell));
            }
  return table;
}

SweepTable run_sweep(const DumpManifest& manifest, const SweepSpec& spec) {
  return run_sweep(load_dump(manifest), spec);
}

std::string sweep_to_csv(const SweepTable& table) {
  std::string out = "strategy,k,bits,scheme,calib_size,sampling,seed,mse,max_abs,sqnr_db,count,error\n";
  for (const auto& c : table.cells) {
    std::string err = c.error;
    for (auto& ch : err) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    }
    out += std::string(to_string(c.strategy)) + "," + std::to_string(c.k) + "," +
           std::to_string(c.bits) + "," + std::string(to_string(c.scheme)) + "," +
           std::to_string(c.calib_size) + "," + std::string(to_string(c.sampling)) + "," +
           std::to_string(c.seed) + ",";
    if (c.error.empty()) {
      out += format_real(c.metrics.mse) + "," + format_real(c.metrics.max_abs) + "," +
             format_real(c.metrics.sqnr_db) + "," + std::to_string(c.metrics.count) + ",";
    } else {
      out += ",,,,";
    }
    out += err + "\n";
  }
  return out;
}

json sweep_to_json(const SweepTable& table) {
  json rows = json::array();
  for (const auto& c : table.cells) {
    json row = {{"strategy", std::string(to_string(c.strategy))},
                {"k", c.k},
                {"bits", c.bits},
                {"scheme", std::string(to_string(c.scheme))},
                {"calib_size", c.calib_size},
                {"sampling", std::string(to_string(c.sampling))},
                {"seed", c.seed}};
    if (c.error.empty()) {
      row["metrics"] = metrics_to_json(c.metrics);
    } else {
      row["error"] = c.error;
    }
    rows.push_back(std::move(row));
  }
  return {{"version", kReportVersion}, {"config", table.config}, {"cells", rows}};
}

}  // namespace ptq
