#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adafed/aggregation.hpp"
#include "adafed/rng.hpp"

namespace adafed {

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst = 0.0;  // worst residual observed, whatever the suite measures
    std::string detail;
};

// Random aggregation instance: K in [2,16], d in [K,256], standard normal
// gradients. Loss ranges depend on gamma: the directional-derivative identity
// is checked at 1e-8 relative error, and with gamma = 5 a 100:1 loss ratio
// raises the check's condition number past what doubles can resolve, so high
// gamma draws its losses from a narrower band. Every generated instance is
// asserted at the full tolerance.
struct AggregationInstance {
    std::vector<ClientUpdate> updates;
    double gamma = 1.0;
};
AggregationInstance random_aggregation_instance(Rng& rng);

CheckResult check_orthogonality(int trials, std::uint64_t seed);
CheckResult check_identity(int trials, std::uint64_t seed);
CheckResult check_span(int trials, std::uint64_t seed);
CheckResult check_oracle(int trials, std::uint64_t seed);
CheckResult check_grid_oracle(int trials, std::uint64_t seed);
CheckResult check_descent(int rounds, std::uint64_t seed);
CheckResult check_gradients(int per_kind, std::uint64_t seed);
CheckResult check_drift(int runs, std::uint64_t seed);

std::vector<CheckResult> run_all_checks(std::uint64_t seed);

}  // namespace adafed
