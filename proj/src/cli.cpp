#include "xalign/cli.hpp"

#include "xalign/embedding.hpp"
#include "xalign/errors.hpp"
#include "xalign/experiment_spec.hpp"
#include "xalign/parallel.hpp"
#include "xalign/run.hpp"
#include "xalign/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace xalign {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<Direction> parse_directions(const std::string& s) {
  if (s == "both") return {Direction::xy, Direction::yx};
  return {parse_direction(s)};
}

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError("not a number: \"" + item + "\"");
    }
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

// Flags shared by the config-driven subcommands.
struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> folds;
  std::optional<std::string> metric;
  std::optional<std::string> direction;
  std::optional<std::string> lambda_grid;
  std::optional<int> k_max;
  std::optional<int> shuffle_count;
  bool no_svg = false;
  bool no_verify = false;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool curve_flags, bool baseline_flags) {
  cmd->add_option("--config", o.config, "experiment config, or a run_record.json to replay")->required();
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("--folds", o.folds, "override the fold count");
  cmd->add_option("--metric", o.metric, "linpred or cka");
  cmd->add_option("--direction", o.direction, "xy, yx or both");
  cmd->add_option("--lambda-grid", o.lambda_grid, "default, logspace:LO:HI:N or a comma list");
  if (curve_flags) cmd->add_option("--k-max", o.k_max, "override the maximum exemplar count");
  if (baseline_flags) cmd->add_option("--shuffle-count", o.shuffle_count, "number of shuffles to average");
  cmd->add_flag("--no-svg", o.no_svg, "skip SVG figures");
  cmd->add_flag("--no-verify", o.no_verify, "do not check input digests when replaying a run record");
}

ExperimentSpec load_with_overrides(const Overrides& o) {
  const fs::path path = o.config;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  const bool is_record = doc.contains("spec") && doc["spec"].is_object();
  if (is_record && !o.no_verify) verify_record_inputs(doc);
  ExperimentSpec spec = spec_from_json(is_record ? doc["spec"] : doc, fs::absolute(path).parent_path());
  if (o.seed) spec.seed = *o.seed;
  if (o.folds) spec.folds = *o.folds;
  if (o.metric) spec.metric = parse_metric(*o.metric);
  if (o.direction) spec.directions = parse_directions(*o.direction);
  if (o.lambda_grid) spec.lambda_grid = parse_lambda_grid(*o.lambda_grid);
  if (o.k_max) spec.k_max = *o.k_max;
  if (o.shuffle_count) spec.shuffle_count = *o.shuffle_count;
  validate(spec);
  return spec;
}

void print_summary(const json& record, std::ostream& out) {
  out << "wrote";
  for (const auto& o : record["outputs"]) out << ' ' << fs::path(o["path"].get<std::string>()).filename().string();
  out << " + run_record.json\n";
}

json pair_entry(const std::string& name, int model, int layer) {
  return {{"name", name},
          {"x", synth_file_name(Modality::vision, model, layer)},
          {"y", synth_file_name(Modality::language, model, layer)}};
}

// Ready-to-run configs next to the generated files.
void write_templates(const SynthConfig& c, const fs::path& dir, std::uint64_t seed) {
  const int last = static_cast<int>(c.shared_fraction.size()) - 1;
  json pairs = json::array();
  for (int m = 0; m < c.n_models; ++m) pairs.push_back(pair_entry("m" + std::to_string(m), m, last));
  auto base = [&](const char* kind) {
    return json{{"kind", kind}, {"metric", "linear_predictivity"}, {"directions", {"xy", "yx"}},
                {"seed", seed},  {"folds", 5},                     {"lambda_grid", "default"},
                {"manifest", "manifest.json"}};
  };
  auto save = [&](const char* name, const json& doc) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << doc.dump(2) << '\n';
  };

  json align = base("align");
  align["pairs"] = pairs;
  save("align.json", align);

  json grid = base("layer_grid");
  grid["x_model"] = "synth_vision_m0";
  grid["y_model"] = "synth_language_m0";
  json xs = json::array();
  json ys = json::array();
  for (int l = 0; l <= last; ++l) {
    xs.push_back(synth_file_name(Modality::vision, 0, l));
    ys.push_back(synth_file_name(Modality::language, 0, l));
  }
  grid["x_layers"] = xs;
  grid["y_layers"] = ys;
  save("layer_grid.json", grid);

  json baseline = base("shuffled_baseline");
  baseline["pairs"] = pairs;
  baseline["shuffle_count"] = 1;

  if (c.exemplars_per_item > 1) {
    json agg = base("aggregation_curve");
    agg["pairs"] = pairs;
    agg["aggregate_side"] = c.exemplar_modality == Modality::language ? "y" : "x";
    agg["k_max"] = c.exemplars_per_item;
    save("aggregation.json", agg);
    baseline["baseline_of"] = "aggregation_curve";
    baseline["aggregate_side"] = agg["aggregate_side"];
    baseline["k_max"] = c.exemplars_per_item;
  } else {
    baseline["baseline_of"] = "align";
  }
  save("baseline.json", baseline);

  if (c.exemplar_groups.size() >= 2) {
    std::vector<std::string> labels;
    for (const auto& g : c.exemplar_groups) {
      if (std::find(labels.begin(), labels.end(), g) == labels.end()) labels.push_back(g);
    }
    if (labels.size() >= 2) {
      json contrast = base("group_contrast");
      contrast["pairing_policy"] = "expand_pairs";
      contrast["pairs"] = pairs;
      contrast["contrasts"] = json::array({{{"name", labels[0] + "_vs_" + labels[1]},
                                            {"family", "groups"},
                                            {"groups", {labels[0], labels[1]}}}});
      save("contrast.json", contrast);
    }
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"xalign: representational alignment between embedding spaces"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: XALIGN_THREADS or all cores)")->check(CLI::PositiveNumber);

  // align
  auto* align = app.add_subcommand("align", "score one x/y pair of embedding files");
  std::string ax, ay, amanifest, aout;
  std::string adirection = "both", ametric = "linpred", agrid = "default", apairing = "one_to_one";
  int afolds = 5;
  std::uint64_t aseed = 0;
  bool ano_svg = false;
  align->add_option("--x", ax, "x-side EMB1 file")->required();
  align->add_option("--y", ay, "y-side EMB1 file")->required();
  align->add_option("--manifest", amanifest, "dataset manifest (pairs rows by pair_key)");
  align->add_option("--direction", adirection, "xy, yx or both")->capture_default_str();
  align->add_option("--metric", ametric, "linpred or cka")->capture_default_str();
  align->add_option("--folds", afolds, "cross-validation folds")->capture_default_str();
  align->add_option("--seed", aseed, "seed for every random choice")->capture_default_str();
  align->add_option("--lambda-grid", agrid, "default, logspace:LO:HI:N or a comma list")->capture_default_str();
  align->add_option("--pairing", apairing, "one_to_one or expand_pairs")->capture_default_str();
  align->add_option("--out", aout, "output directory")->required();
  align->add_flag("--no-svg", ano_svg, "accepted for symmetry; align writes no figures");

  Overrides grid_o, contrast_o, agg_o, base_o, run_o;
  auto* grid = app.add_subcommand("layer-grid", "all-pairs layer grid between two models");
  add_overrides(grid, grid_o, false, false);
  auto* contrast = app.add_subcommand("contrast", "group or variant contrasts with paired t-tests and BH-FDR");
  add_overrides(contrast, contrast_o, false, false);
  auto* aggregate = app.add_subcommand("aggregate", "alignment as exemplars are averaged, k = 1..k_max");
  add_overrides(aggregate, agg_o, true, false);
  auto* baseline = app.add_subcommand("baseline", "matched versus shuffled correspondences");
  add_overrides(baseline, base_o, true, true);
  auto* run = app.add_subcommand("run", "run any experiment config or replay a run record");
  add_overrides(run, run_o, true, true);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic shared-latent dataset and template configs");
  SynthConfig sc;
  std::string sout, sfractions = "1", smodality = "language", sexnoise, sgroups;
  synth->add_option("--out", sout, "output directory")->required();
  synth->add_option("--n-items", sc.n_items)->capture_default_str();
  synth->add_option("--latent-dim", sc.latent_dim)->capture_default_str();
  synth->add_option("--d-vision", sc.d_vision)->capture_default_str();
  synth->add_option("--d-language", sc.d_language)->capture_default_str();
  synth->add_option("--noise-vision", sc.noise_vision)->capture_default_str();
  synth->add_option("--noise-language", sc.noise_language)->capture_default_str();
  synth->add_option("--shared-fraction", sfractions, "comma list, one entry per layer")->capture_default_str();
  synth->add_option("--models", sc.n_models, "independent model pairs")->capture_default_str();
  synth->add_option("--exemplars", sc.exemplars_per_item, "exemplars per item")->capture_default_str();
  synth->add_option("--exemplar-modality", smodality, "vision or language")->capture_default_str();
  synth->add_option("--exemplar-noise", sexnoise, "comma list of per-exemplar noise levels");
  synth->add_option("--exemplar-groups", sgroups, "comma list of per-exemplar group labels");
  synth->add_option("--seed", sc.seed)->capture_default_str();

  // inspect
  auto* inspect = app.add_subcommand("inspect", "print EMB1 headers");
  std::vector<std::string> files;
  bool ijson = false;
  inspect->add_option("files", files, "EMB1 files")->required();
  inspect->add_flag("--json", ijson, "one JSON object per file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (threads > 0) set_thread_count(threads);

    if (align->parsed()) {
      ExperimentSpec spec;
      spec.kind = ExperimentKind::align;
      spec.metric = parse_metric(ametric);
      spec.directions = parse_directions(adirection);
      spec.seed = aseed;
      spec.folds = afolds;
      spec.lambda_grid = parse_lambda_grid(agrid);
      spec.pairing = parse_pairing_policy(apairing);
      if (!amanifest.empty()) spec.manifest = fs::absolute(amanifest).lexically_normal();
      spec.pairs.push_back({"pair", fs::absolute(ax).lexically_normal(), fs::absolute(ay).lexically_normal(), {}});
      validate(spec);
      print_summary(run_experiment(spec, aout, {!ano_svg}), out);
      return kExitOk;
    }

    const std::pair<CLI::App*, std::pair<Overrides*, std::optional<ExperimentKind>>> config_cmds[] = {
        {grid, {&grid_o, ExperimentKind::layer_grid}},
        {contrast, {&contrast_o, ExperimentKind::group_contrast}},
        {aggregate, {&agg_o, ExperimentKind::aggregation_curve}},
        {baseline, {&base_o, ExperimentKind::shuffled_baseline}},
        {run, {&run_o, std::nullopt}},
    };
    for (const auto& [cmd, binding] : config_cmds) {
      if (!cmd->parsed()) continue;
      const auto& [o, expected] = binding;
      const ExperimentSpec spec = load_with_overrides(*o);
      if (expected && spec.kind != *expected) {
        throw ArgumentError("config kind is " + std::string(to_string(spec.kind)) + " but `" + cmd->get_name() +
                            "` runs " + std::string(to_string(*expected)));
      }
      print_summary(run_experiment(spec, o->out, {!o->no_svg}), out);
      return kExitOk;
    }

    if (synth->parsed()) {
      sc.shared_fraction = parse_number_list(sfractions);
      sc.exemplar_modality = parse_modality(smodality);
      if (!sexnoise.empty()) sc.exemplar_noise = parse_number_list(sexnoise);
      if (!sgroups.empty()) sc.exemplar_groups = parse_string_list(sgroups);
      const SynthData data = generate(sc);
      write_synth(data, sout);
      write_templates(sc, sout, sc.seed);
      out << "wrote synthetic dataset to " << sout << '\n';
      return kExitOk;
    }

    if (inspect->parsed()) {
      for (const auto& f : files) {
        const EmbeddingHeader h = read_embedding_header(f);
        json meta = json::parse(h.metadata_json);
        const auto ids = meta.value("item_ids", json::array());
        if (ijson) {
          meta.erase("item_ids");
          meta["file"] = f;
          meta["version"] = h.version;
          meta["dtype"] = h.dtype == Dtype::f32 ? "f32" : "f64";
          meta["rows"] = h.rows;
          meta["cols"] = h.cols;
          meta["file_size"] = h.file_size;
          out << meta.dump() << '\n';
          continue;
        }
        out << f << '\n'
            << "  model_id:    " << meta.value("model_id", std::string{}) << '\n'
            << "  layer_index: " << meta.value("layer_index", 0) << '\n'
            << "  modality:    " << meta.value("modality", std::string{}) << '\n'
            << "  variant:     " << meta.value("variant", std::string{}) << '\n'
            << "  dtype:       " << (h.dtype == Dtype::f32 ? "f32" : "f64") << '\n'
            << "  shape:       " << h.rows << " x " << h.cols << '\n'
            << "  item_ids:   ";
        for (std::size_t i = 0; i < ids.size() && i < 3; ++i) out << ' ' << ids[i].get<std::string>();
        if (ids.size() > 3) out << " ...";
        out << '\n';
      }
      return kExitOk;
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace xalign
