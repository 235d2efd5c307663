#pragma once

#include "xalign/experiments.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace xalign {

/// Round-trippable decimal form ("%.17g"); "nan" for NaN.
std::string format_number(double v);

// CSV files start with a "# xalign <table> v1" line followed by a header row.
void write_align_csv(const std::filesystem::path& path, std::span<const AlignRow> rows);
void write_grid_csv(const std::filesystem::path& path, const LayerGrid& grid);
void write_contrast_scores_csv(const std::filesystem::path& path, std::span<const ContrastScore> scores);
void write_contrast_summary_csv(const std::filesystem::path& path, std::span<const ContrastSummary> summaries);
void write_curve_csv(const std::filesystem::path& path, std::span<const CurvePoint> curve);
void write_baseline_csv(const std::filesystem::path& path, const BaselineReport& report);

/// Reads the per-pair table written by write_contrast_scores_csv.
std::vector<ContrastScore> read_contrast_scores_csv(const std::filesystem::path& path);

nlohmann::json to_json(const AlignmentResult& r);
nlohmann::json to_json(std::span<const AlignRow> rows);
nlohmann::json to_json(const LayerGrid& grid);
nlohmann::json to_json(const ContrastReport& report);
nlohmann::json to_json(std::span<const CurvePoint> curve);
nlohmann::json to_json(const BaselineReport& report);

/// Heatmap of one direction of the grid (rows: x layers, columns: y layers).
void write_grid_svg(const std::filesystem::path& path, const LayerGrid& grid, Direction direction);
/// Mean curve with a +/- one standard error band per direction; the optional
/// second curve (a shuffled baseline) is drawn dashed.
void write_curve_svg(const std::filesystem::path& path, std::span<const CurvePoint> curve,
                     std::span<const CurvePoint> baseline = {});

}  // namespace xalign
