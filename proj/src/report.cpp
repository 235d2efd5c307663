#include "xalign/report.hpp"

#include "xalign/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace xalign {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string join_numbers(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_number(v[i]);
  }
  return out;
}

json number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json stats_json(const std::optional<StatsResult>& s) {
  if (!s) return nullptr;
  return {{"t", s->t}, {"df", s->df}, {"p", s->p}, {"q", s->q ? json(*s->q) : json(nullptr)},
          {"n", s->n}, {"mean_difference", s->mean_difference}};
}

}  // namespace

void write_align_csv(const fs::path& path, std::span<const AlignRow> rows) {
  auto out = open_out(path);
  out << "# xalign align v1\n";
  out << "pair,direction,metric,score,n_items,d_source,d_target,fold_scores,fold_lambdas\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    out << csv_field(row.pair) << ',' << to_string(r.direction) << ',' << to_string(r.metric) << ','
        << format_number(r.score) << ',' << r.n_items << ',' << r.d_source << ',' << r.d_target << ','
        << join_numbers(r.per_fold_scores) << ',' << join_numbers(r.per_fold_lambda) << '\n';
  }
}

void write_grid_csv(const fs::path& path, const LayerGrid& grid) {
  auto out = open_out(path);
  out << "# xalign layer_grid v1\n";
  out << "direction,x_model,x_layer,y_model,y_layer,metric,score,n_items,d_source,d_target,fold_scores,fold_lambdas\n";
  for (const auto& c : grid.cells) {
    const auto& r = c.result;
    out << to_string(c.direction) << ',' << csv_field(grid.x_model) << ',' << c.source_layer << ','
        << csv_field(grid.y_model) << ',' << c.target_layer << ',' << to_string(r.metric) << ','
        << format_number(r.score) << ',' << r.n_items << ',' << r.d_source << ',' << r.d_target << ','
        << join_numbers(r.per_fold_scores) << ',' << join_numbers(r.per_fold_lambda) << '\n';
  }
}

void write_contrast_scores_csv(const fs::path& path, std::span<const ContrastScore> scores) {
  auto out = open_out(path);
  out << "# xalign contrast_scores v1\n";
  out << "pair,contrast,family,direction,score_a,score_b,n_rows_a,n_rows_b\n";
  for (const auto& s : scores) {
    out << csv_field(s.pair) << ',' << csv_field(s.contrast) << ',' << csv_field(s.family) << ','
        << to_string(s.direction) << ',' << format_number(s.score_a) << ',' << format_number(s.score_b) << ','
        << s.n_rows_a << ',' << s.n_rows_b << '\n';
  }
}

std::vector<ContrastScore> read_contrast_scores_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<ContrastScore> scores;
  std::string line;
  std::vector<std::string> header;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (header.empty()) {
      header = std::move(fields);
      continue;
    }
    if (fields.size() != header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    auto get = [&](const char* name) -> const std::string& {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw FormatError(path.string() + ": missing column " + name);
      return fields[static_cast<std::size_t>(it - header.begin())];
    };
    auto num = [&](const char* name) {
      const std::string& s = get(name);
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number in " + name);
      }
    };
    ContrastScore s;
    s.pair = get("pair");
    s.contrast = get("contrast");
    auto fam = std::find(header.begin(), header.end(), "family");
    s.family = fam == header.end() ? "default" : fields[static_cast<std::size_t>(fam - header.begin())];
    s.direction = parse_direction(get("direction"));
    s.score_a = num("score_a");
    s.score_b = num("score_b");
    if (!std::isfinite(s.score_a) || !std::isfinite(s.score_b)) {
      throw NumericError(path.string() + ":" + std::to_string(line_no) + ": non-finite score");
    }
    scores.push_back(std::move(s));
  }
  if (scores.empty()) throw FormatError(path.string() + ": no score rows");
  return scores;
}

void write_contrast_summary_csv(const fs::path& path, std::span<const ContrastSummary> summaries) {
  auto out = open_out(path);
  out << "# xalign contrast v1\n";
  out << "contrast,family,direction,n_pairs,mean_a,mean_b,mean_diff,t,df,p,q,note\n";
  const double nan = std::nan("");
  for (const auto& s : summaries) {
    const auto& st = s.stats;
    out << csv_field(s.contrast) << ',' << csv_field(s.family) << ',' << to_string(s.direction) << ',' << s.n_pairs
        << ',' << format_number(s.mean_a) << ',' << format_number(s.mean_b) << ','
        << format_number(s.mean_a - s.mean_b) << ',' << format_number(st ? st->t : nan) << ','
        << (st ? std::to_string(st->df) : std::string("nan")) << ',' << format_number(st ? st->p : nan) << ','
        << format_number(st && st->q ? *st->q : nan) << ',' << csv_field(s.note) << '\n';
  }
}

void write_curve_csv(const fs::path& path, std::span<const CurvePoint> curve) {
  auto out = open_out(path);
  out << "# xalign aggregation v1\n";
  out << "direction,k,score_mean,score_stderr,n_pairs,pair_scores\n";
  for (const auto& c : curve) {
    out << to_string(c.direction) << ',' << c.k << ',' << format_number(c.mean) << ','
        << format_number(c.std_error) << ',' << c.per_pair.size() << ',' << join_numbers(c.per_pair) << '\n';
  }
}

void write_baseline_csv(const fs::path& path, const BaselineReport& report) {
  auto out = open_out(path);
  out << "# xalign baseline v1\n";
  out << "baseline_of,condition,direction,k,score_mean,score_stderr,n_pairs,pair_scores\n";
  auto rows = [&](std::span<const CurvePoint> curve, const char* condition) {
    for (const auto& c : curve) {
      out << to_string(report.baseline_of) << ',' << condition << ',' << to_string(c.direction) << ',' << c.k << ','
          << format_number(c.mean) << ',' << format_number(c.std_error) << ',' << c.per_pair.size() << ','
          << join_numbers(c.per_pair) << '\n';
    }
  };
  rows(report.matched, "matched");
  rows(report.shuffled, "shuffled");
}

json to_json(const AlignmentResult& r) {
  return {{"direction", std::string(to_string(r.direction))},
          {"metric", std::string(to_string(r.metric))},
          {"score", number(r.score)},
          {"per_fold_scores", r.per_fold_scores},
          {"per_fold_lambda", r.per_fold_lambda},
          {"n_items", r.n_items},
          {"d_source", r.d_source},
          {"d_target", r.d_target}};
}

json to_json(std::span<const AlignRow> rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json j = to_json(row.result);
    j["pair"] = row.pair;
    out.push_back(std::move(j));
  }
  return out;
}

json to_json(const LayerGrid& grid) {
  json cells = json::array();
  for (const auto& c : grid.cells) {
    json j = to_json(c.result);
    j["x_layer"] = c.source_layer;
    j["y_layer"] = c.target_layer;
    cells.push_back(std::move(j));
  }
  return {{"x_model", grid.x_model},
          {"y_model", grid.y_model},
          {"x_layers", grid.source_layers},
          {"y_layers", grid.target_layers},
          {"cells", cells}};
}

json to_json(const ContrastReport& report) {
  json scores = json::array();
  for (const auto& s : report.scores) {
    scores.push_back({{"pair", s.pair},
                      {"contrast", s.contrast},
                      {"family", s.family},
                      {"direction", std::string(to_string(s.direction))},
                      {"score_a", s.score_a},
                      {"score_b", s.score_b},
                      {"n_rows_a", s.n_rows_a},
                      {"n_rows_b", s.n_rows_b}});
  }
  json summaries = json::array();
  for (const auto& s : report.summaries) {
    summaries.push_back({{"contrast", s.contrast},
                         {"family", s.family},
                         {"direction", std::string(to_string(s.direction))},
                         {"n_pairs", s.n_pairs},
                         {"mean_a", s.mean_a},
                         {"mean_b", s.mean_b},
                         {"stats", stats_json(s.stats)},
                         {"note", s.note}});
  }
  return {{"scores", scores}, {"summaries", summaries}};
}

json to_json(std::span<const CurvePoint> curve) {
  json out = json::array();
  for (const auto& c : curve) {
    out.push_back({{"k", c.k},
                   {"direction", std::string(to_string(c.direction))},
                   {"score_mean", number(c.mean)},
                   {"score_stderr", number(c.std_error)},
                   {"per_pair", c.per_pair}});
  }
  return out;
}

json to_json(const BaselineReport& report) {
  return {{"baseline_of", std::string(to_string(report.baseline_of))},
          {"matched", to_json(std::span<const CurvePoint>(report.matched))},
          {"shuffled", to_json(std::span<const CurvePoint>(report.shuffled))},
          {"contrast", to_json(report.contrast)}};
}

// ------------------------------------------------------------------ SVG

namespace {

std::string rgb_hex(double t) {
  // Blue (low) to yellow (high) through teal.
  t = std::clamp(t, 0.0, 1.0);
  const double r = 68 + t * (253 - 68);
  const double g = 1 + t * (231 - 1);
  const double b = 84 + (t < 0.5 ? t * 2 * (140 - 84) : (140 - (t - 0.5) * 2 * (140 - 37)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(r), static_cast<int>(g), static_cast<int>(b));
  return buf;
}

std::string fixed(double v, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_grid_svg(const fs::path& path, const LayerGrid& grid, Direction direction) {
  const int cell = 28;
  const int left = 70;
  const int top = 50;
  const int nx = static_cast<int>(grid.source_layers.size());
  const int ny = static_cast<int>(grid.target_layers.size());
  double lo = 1.0;
  double hi = -1.0;
  for (const auto& c : grid.cells) {
    if (c.direction != direction) continue;
    lo = std::min(lo, c.result.score);
    hi = std::max(hi, c.result.score);
  }
  if (hi <= lo) hi = lo + 1e-12;

  const int width = left + ny * cell + 20;
  const int height = top + nx * cell + 40;
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out << "<text x=\"" << left << "\" y=\"16\" font-size=\"12\">" << grid.x_model << " vs " << grid.y_model << " ("
      << to_string(direction) << "), score " << fixed(lo) << " to " << fixed(hi) << "</text>\n";
  out << "<text x=\"" << left << "\" y=\"" << top - 22 << "\">" << grid.y_model << " layer</text>\n";
  out << "<text x=\"4\" y=\"" << top - 8 << "\">" << grid.x_model << " layer</text>\n";
  for (int j = 0; j < ny; ++j) {
    out << "<text x=\"" << left + j * cell + cell / 2 << "\" y=\"" << top - 6 << "\" text-anchor=\"middle\">"
        << grid.target_layers[static_cast<std::size_t>(j)] << "</text>\n";
  }
  for (int i = 0; i < nx; ++i) {
    const int layer_x = grid.source_layers[static_cast<std::size_t>(i)];
    out << "<text x=\"" << left - 6 << "\" y=\"" << top + i * cell + cell / 2 + 4 << "\" text-anchor=\"end\">"
        << layer_x << "</text>\n";
    for (int j = 0; j < ny; ++j) {
      const double s = grid.at(direction, layer_x, grid.target_layers[static_cast<std::size_t>(j)]).result.score;
      out << "<rect x=\"" << left + j * cell << "\" y=\"" << top + i * cell << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"" << rgb_hex((s - lo) / (hi - lo)) << "\"><title>" << layer_x
          << " / " << grid.target_layers[static_cast<std::size_t>(j)] << ": " << format_number(s)
          << "</title></rect>\n";
    }
  }
  out << "</svg>\n";
}

void write_curve_svg(const fs::path& path, std::span<const CurvePoint> curve, std::span<const CurvePoint> baseline) {
  const int width = 520;
  const int height = 340;
  const int left = 60;
  const int right = 20;
  const int top = 30;
  const int bottom = 40;
  int k_max = 1;
  double lo = 1e300;
  double hi = -1e300;
  auto extend = [&](std::span<const CurvePoint> c) {
    for (const auto& p : c) {
      k_max = std::max(k_max, p.k);
      const double e = std::isnan(p.std_error) ? 0.0 : p.std_error;
      lo = std::min(lo, p.mean - e);
      hi = std::max(hi, p.mean + e);
    }
  };
  extend(curve);
  extend(baseline);
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto px = [&](int k) {
    return left + (k_max == 1 ? 0.5 : static_cast<double>(k - 1) / (k_max - 1)) * (width - left - right);
  };
  auto py = [&](double v) { return top + (hi - v) / (hi - lo) * (height - top - bottom); };

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\">exemplars averaged (k)</text>\n";
  out << "<text x=\"4\" y=\"" << top - 10 << "\">score " << fixed(lo) << " to " << fixed(hi) << "</text>\n";
  for (int k = 1; k <= k_max; ++k) {
    out << "<text x=\"" << fixed(px(k), 1) << "\" y=\"" << height - bottom + 14 << "\" text-anchor=\"middle\">" << k
        << "</text>\n";
  }

  const char* colors[] = {"#1f77b4", "#d62728"};
  auto draw = [&](std::span<const CurvePoint> c, bool dashed) {
    for (auto d : {Direction::xy, Direction::yx}) {
      std::vector<const CurvePoint*> pts;
      for (const auto& p : c) {
        if (p.direction == d) pts.push_back(&p);
      }
      if (pts.empty()) continue;
      const char* color = colors[static_cast<int>(d)];
      std::ostringstream band;
      std::ostringstream line;
      bool has_band = false;
      for (const auto* p : pts) {
        const double e = std::isnan(p->std_error) ? 0.0 : p->std_error;
        has_band = has_band || e > 0.0;
        band << fixed(px(p->k), 1) << ',' << fixed(py(p->mean + e), 1) << ' ';
        line << fixed(px(p->k), 1) << ',' << fixed(py(p->mean), 1) << ' ';
      }
      for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        const double e = std::isnan((*it)->std_error) ? 0.0 : (*it)->std_error;
        band << fixed(px((*it)->k), 1) << ',' << fixed(py((*it)->mean - e), 1) << ' ';
      }
      if (has_band) {
        out << "<polygon points=\"" << band.str() << "\" fill=\"" << color << "\" fill-opacity=\"0.2\"/>\n";
      }
      out << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
          << (dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
      for (const auto* p : pts) {
        out << "<circle cx=\"" << fixed(px(p->k), 1) << "\" cy=\"" << fixed(py(p->mean), 1) << "\" r=\"3\" fill=\""
            << color << "\"><title>" << to_string(d) << " k=" << p->k << ": " << format_number(p->mean)
            << "</title></circle>\n";
      }
    }
  };
  draw(curve, false);
  draw(baseline, true);
  out << "<text x=\"" << width - right - 150 << "\" y=\"" << top << "\" fill=\"" << colors[0] << "\">xy</text>\n";
  out << "<text x=\"" << width - right - 120 << "\" y=\"" << top << "\" fill=\"" << colors[1] << "\">yx</text>\n";
  if (!baseline.empty()) {
    out << "<text x=\"" << width - right - 90 << "\" y=\"" << top << "\">dashed: shuffled</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace xalign
