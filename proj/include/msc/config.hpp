#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "msc/stepper.hpp"

namespace msc {

/// Everything one CLI invocation needs.
struct RunConfig {
    std::string command = "run";  // conserve, mms, run, mesh-info
    SchemeConfig scheme;
    std::string out = ".";
    /// VTK snapshot every this many steps; 0 disables.
    int vtk_every = 0;
    /// Mesh list of a convergence sweep.
    std::vector<int> meshes{4, 8};
    std::uint64_t seed = 1;
};

/// Sets one field from its textual value. Unknown keys and malformed values
/// throw ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Flat "key = value" lines; '#' starts a comment. Later keys override
/// earlier ones.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
/// Every field; parsing the result gives back the same config.
std::string serialize_config(const RunConfig& cfg);

bool operator==(const SchemeConfig& a, const SchemeConfig& b);
bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace msc
