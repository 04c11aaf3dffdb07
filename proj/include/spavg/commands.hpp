#pragma once

#include "spavg/config.hpp"

#include <string>
#include <utility>
#include <vector>

namespace spavg {

struct CommandOutput {
    /// (file name, contents), in emission order.
    std::vector<std::pair<std::string, std::string>> artifacts;
    /// Human-readable report, one fact per line.
    std::string summary;
    /// 1 pass, 0 fail, -1 when the command has no verdict.
    int verdict = -1;
};

/// simulate | average | grid | bounds | sweep | figures | estimate
[[nodiscard]] CommandOutput run_command(const ConfigMap& cfg, const std::string& command);

[[nodiscard]] const std::vector<std::string>& command_names();

}  // namespace spavg
