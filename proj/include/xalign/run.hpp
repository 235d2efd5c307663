#pragma once

#include "xalign/experiment_spec.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string_view>

namespace xalign {

std::string_view version();

struct RunOptions {
  bool svg = true;
};

/// Runs `spec`, writes its CSV/JSON/SVG outputs into `out_dir` and returns
/// the run record, which is also written there as run_record.json. The
/// record embeds the spec with absolute paths and the SHA-256 of every input
/// and output, so it can be passed back as a config to replay the run.
nlohmann::json run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                              const RunOptions& options = {});

/// Throws FormatError when an input listed in a run record no longer has the
/// recorded digest.
void verify_record_inputs(const nlohmann::json& record);

}  // namespace xalign
