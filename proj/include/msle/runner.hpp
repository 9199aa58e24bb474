#pragma once

#include <string>

#include "msle/config.hpp"

namespace msle::io {

struct RunOutcome {
  bool checks_ok = true;   // false: an acceptance-tagged check in the run failed
  std::string manifest_path;
};

// executes the requested pipeline, writes outputs and the run manifest
RunOutcome run(const RunConfig& config);

} // namespace msle::io
