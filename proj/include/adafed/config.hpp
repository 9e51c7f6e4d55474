#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "adafed/federation.hpp"

namespace adafed {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parsed config file: section -> key -> (value, line). Flat, sectioned
// key-value text; '#' starts a comment; unknown sections or keys are errors
// when the document is turned into a FederatedConfig.
struct ConfigDoc {
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, std::map<std::string, Entry>> sections;
};

ConfigDoc parse_config_text(const std::string& text);
ConfigDoc load_config_file(const std::string& path);

// Every key is optional (struct defaults apply); every present key must be
// known. Validation of cross-field consistency happens in validate().
FederatedConfig config_from_doc(const ConfigDoc& doc);

// FNV-1a over the sorted canonical "section.key=value" lines, so key order
// and whitespace never change the digest.
std::string canonical_hash(const ConfigDoc& doc);

// Aggregator override tokens for the compare command. A token is an
// aggregator name followed by colon-separated key=value options:
//   adafed:gamma=<v>
//   fedavg:weights=<uniform|by_sample_count>
//   mgda
// plus schedule=<constant|inverse_t|inverse_sqrt_t|descent_bound> and
// base=<v>, which override the config's global schedule for that aggregator
// only (per-method step tuning).
struct AggregatorOverride {
    AggregatorSpec aggregator;
    std::optional<ScheduleSpec> schedule;
};
AggregatorOverride parse_aggregator_token(const std::string& token, const AggregatorSpec& base,
                                          const ScheduleSpec& base_schedule = {});

std::string to_string(AggregatorKind kind);
std::string to_string(ModelKind kind);

}  // namespace adafed
