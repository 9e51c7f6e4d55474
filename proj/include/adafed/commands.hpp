#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adafed {

// Exit codes: 0 success, 2 config error, 3 runtime error (with round index).
int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override);

int cmd_compare(const std::string& config_path, const std::vector<std::string>& aggregators,
                const std::vector<std::uint64_t>& seeds, const std::string& out_dir);

// Exit code 0 iff every invariant suite passes.
int cmd_verify();

}  // namespace adafed
