#pragma once

#include <string>
#include <vector>

#include "sigmav/config.hpp"
#include "sigmav/model.hpp"

namespace sigmav {

inline constexpr const char* kVersion = "1.0.0";

struct RunOutcome {
  int exit_code = 0;  ///< 0 ok, 2 complete but flagged, 1 error
  std::vector<std::string> files;  ///< data files written, relative to the output directory
  std::vector<std::string> warnings;
  std::string error;
};

/// Builds the potential described by a model block.
PotentialModel model_from_block(const ModelBlock& block);

/// Git blob hash (SHA-1 of "blob <size>\0" + text), lowercase hex.
std::string content_hash(const std::string& text);

/// Runs one experiment and writes its data files plus manifest.json into
/// out_dir (created if needed). Errors are caught and recorded in the
/// manifest. config_text is hashed as given; when empty the canonical
/// emitted form is hashed instead.
RunOutcome run_experiment(const RunConfig& config, const std::string& out_dir, const std::string& config_text = {});

}  // namespace sigmav
