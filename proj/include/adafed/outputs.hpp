#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "adafed/aggregation.hpp"
#include "adafed/config.hpp"
#include "adafed/federation.hpp"
#include "adafed/metrics.hpp"

namespace adafed {

struct RunManifest {
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
    std::string started;
    std::string finished;
};

// Reals are written with 17 significant digits so every CSV value parses back
// to the exact double that produced it.
std::string fmt_real(double v);

// rounds.csv row schema:
// round,global_lr,direction_norm,rho,mean_loss,mean_acc,std_acc,worst10,best10,angle,kl,dropped_count
void write_rounds_csv(const std::vector<RoundRecord>& records, std::ostream& os);

// lambda.csv: round,client_id,lambda (dropped clients carry lambda = 0).
void write_lambda_csv(const std::vector<RoundRecord>& records, std::ostream& os);

// summary.json: final fairness report, config echo, manifest. Schema is
// documented in docs/output.md.
std::string summary_json(const ConfigDoc& doc, const RunManifest& manifest,
                         const std::vector<RoundRecord>& records,
                         const FairnessReport* final_fairness, double final_mean_loss);

struct CompareRow {
    std::string aggregator;
    // mean and std across seeds for each fairness field, in header order
    FairnessReport mean;
    FairnessReport stddev;
};

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& os);

std::string aggregation_json(const AggregationResult& result);
std::string fairness_json(const FairnessReport& report);

std::string iso_timestamp_utc();

}  // namespace adafed
