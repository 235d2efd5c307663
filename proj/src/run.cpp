#include "xalign/run.hpp"

#include "xalign/digest.hpp"
#include "xalign/errors.hpp"
#include "xalign/experiments.hpp"
#include "xalign/parallel.hpp"
#include "xalign/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#ifndef XALIGN_VERSION
#define XALIGN_VERSION "0.0.0"
#endif

namespace xalign {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view version() { return XALIGN_VERSION; }

namespace {

std::optional<DatasetManifest> load_optional_manifest(const ExperimentSpec& spec) {
  if (!spec.manifest) return std::nullopt;
  return load_manifest(*spec.manifest);
}

std::vector<PairData> load_pairs(const ExperimentSpec& spec) {
  std::vector<PairData> pairs;
  for (const auto& p : spec.pairs) pairs.push_back({p.name, read_embeddings(p.x), read_embeddings(p.y)});
  return pairs;
}

AggregationOptions aggregation_options(const ExperimentSpec& spec) {
  return {spec.aggregate_side, spec.k_max, spec.drop_deficient};
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

}  // namespace

std::vector<AlignRow> run_align(const ExperimentSpec& spec) {
  const auto manifest = load_optional_manifest(spec);
  const auto pairs = load_pairs(spec);
  return compute_align(pairs, manifest ? &*manifest : nullptr, analysis_options(spec));
}

LayerGrid run_layer_grid(const ExperimentSpec& spec) {
  const auto manifest = load_optional_manifest(spec);
  std::vector<EmbeddingMatrix> xs;
  std::vector<EmbeddingMatrix> ys;
  for (const auto& p : spec.x_layers) xs.push_back(read_embeddings(p));
  for (const auto& p : spec.y_layers) ys.push_back(read_embeddings(p));
  auto check_model = [](const std::vector<EmbeddingMatrix>& layers, const std::string& expected) {
    for (const auto& m : layers) {
      if (m.model_id != layers.front().model_id || (!expected.empty() && m.model_id != expected)) {
        throw FormatError("layer files mix models: " + m.model_id + " vs " +
                          (expected.empty() ? layers.front().model_id : expected));
      }
    }
  };
  check_model(xs, spec.x_model);
  check_model(ys, spec.y_model);
  return compute_layer_grid(xs, ys, manifest ? &*manifest : nullptr, analysis_options(spec), spec.source_layers,
                            spec.target_layers);
}

ContrastReport run_group_contrast(const ExperimentSpec& spec) {
  if (spec.scores_csv) {
    ContrastReport report;
    report.scores = read_contrast_scores_csv(*spec.scores_csv);
    report.summaries = summarize_contrasts(report.scores);
    return report;
  }
  const auto manifest = load_optional_manifest(spec);
  std::vector<ContrastPairData> pairs;
  for (const auto& p : spec.pairs) {
    ContrastPairData d{p.name, read_embeddings(p.x), read_embeddings(p.y), {}};
    for (const auto& [name, v] : p.variants) {
      VariantData vd;
      if (v.x) vd.x = read_embeddings(*v.x);
      if (v.y) vd.y = read_embeddings(*v.y);
      d.variants.emplace(name, std::move(vd));
    }
    pairs.push_back(std::move(d));
  }
  return compute_group_contrast(pairs, manifest ? &*manifest : nullptr, spec.contrasts, analysis_options(spec));
}

std::vector<CurvePoint> run_aggregation_curve(const ExperimentSpec& spec) {
  if (!spec.manifest) throw ArgumentError("aggregation_curve needs a manifest");
  const auto manifest = load_manifest(*spec.manifest);
  const auto pairs = load_pairs(spec);
  return compute_aggregation_curve(pairs, manifest, aggregation_options(spec), analysis_options(spec));
}

BaselineReport run_shuffled_baseline(const ExperimentSpec& spec) {
  const auto manifest = load_optional_manifest(spec);
  const auto pairs = load_pairs(spec);
  return compute_shuffled_baseline(pairs, manifest ? &*manifest : nullptr, spec.baseline_of, spec.shuffle_count,
                                   aggregation_options(spec), analysis_options(spec));
}

json run_experiment(const ExperimentSpec& spec, const fs::path& out_dir, const RunOptions& options) {
  validate(spec);
  const std::string started = utc_now();

  json inputs = json::array();
  for (const auto& p : spec_inputs(spec)) {
    if (!fs::exists(p)) throw IoError("input file not found: " + p.string());
    inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  }

  fs::create_directories(out_dir);
  std::vector<fs::path> outputs;
  json report;
  report["kind"] = std::string(to_string(spec.kind));

  switch (spec.kind) {
    case ExperimentKind::align: {
      const auto rows = run_align(spec);
      outputs.push_back(out_dir / "align.csv");
      write_align_csv(outputs.back(), rows);
      report["results"] = to_json(std::span<const AlignRow>(rows));
      break;
    }
    case ExperimentKind::layer_grid: {
      const auto grid = run_layer_grid(spec);
      outputs.push_back(out_dir / "layer_grid.csv");
      write_grid_csv(outputs.back(), grid);
      if (options.svg) {
        for (auto d : spec.directions) {
          outputs.push_back(out_dir / ("layer_grid_" + std::string(to_string(d)) + ".svg"));
          write_grid_svg(outputs.back(), grid, d);
        }
      }
      report["grid"] = to_json(grid);
      break;
    }
    case ExperimentKind::group_contrast: {
      const auto contrast = run_group_contrast(spec);
      outputs.push_back(out_dir / "contrast.csv");
      write_contrast_summary_csv(outputs.back(), contrast.summaries);
      outputs.push_back(out_dir / "contrast_scores.csv");
      write_contrast_scores_csv(outputs.back(), contrast.scores);
      report["contrast"] = to_json(contrast);
      break;
    }
    case ExperimentKind::aggregation_curve: {
      const auto curve = run_aggregation_curve(spec);
      outputs.push_back(out_dir / "aggregation.csv");
      write_curve_csv(outputs.back(), curve);
      if (options.svg) {
        outputs.push_back(out_dir / "aggregation.svg");
        write_curve_svg(outputs.back(), curve);
      }
      report["curve"] = to_json(std::span<const CurvePoint>(curve));
      break;
    }
    case ExperimentKind::shuffled_baseline: {
      const auto baseline = run_shuffled_baseline(spec);
      outputs.push_back(out_dir / "baseline.csv");
      write_baseline_csv(outputs.back(), baseline);
      outputs.push_back(out_dir / "contrast.csv");
      write_contrast_summary_csv(outputs.back(), baseline.contrast.summaries);
      if (options.svg && spec.baseline_of == ExperimentKind::aggregation_curve) {
        outputs.push_back(out_dir / "baseline.svg");
        write_curve_svg(outputs.back(), baseline.matched, baseline.shuffled);
      }
      report["baseline"] = to_json(baseline);
      break;
    }
  }

  const json spec_doc = spec_to_json(spec);
  report["spec"] = spec_doc;
  outputs.push_back(out_dir / "report.json");
  write_json(outputs.back(), report);

  json record;
  record["format"] = "xalign-run-record";
  record["format_version"] = 1;
  record["tool_version"] = std::string(version());
  record["spec"] = spec_doc;
  record["spec_sha256"] = sha256_hex(spec_doc.dump());
  record["inputs"] = inputs;
  json outs = json::array();
  for (const auto& p : outputs) outs.push_back({{"path", fs::absolute(p).string()}, {"sha256", sha256_file(p)}});
  record["outputs"] = outs;
  record["threads"] = thread_count();
  record["started_at"] = started;
  record["finished_at"] = utc_now();
  write_json(out_dir / "run_record.json", record);
  return record;
}

void verify_record_inputs(const json& record) {
  if (!record.contains("inputs")) return;
  for (const auto& entry : record["inputs"]) {
    const fs::path p = entry.at("path").get<std::string>();
    if (!fs::exists(p)) throw IoError("recorded input is missing: " + p.string());
    if (sha256_file(p) != entry.at("sha256").get<std::string>()) {
      throw FormatError("recorded input changed since the run: " + p.string());
    }
  }
}

}  // namespace xalign
