#pragma once

#include <span>
#include <string>

namespace adafed {

// Fairness statistics over per-client accuracies. std_accuracy uses the
// population form (divisor K). angle_degrees is the angle between the
// accuracy vector and the all-ones vector; kl_to_uniform is KL(a/sum(a) || u)
// with the 0 log 0 = 0 convention.
struct FairnessReport {
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double worst_k_pct = 0.0;
    double best_k_pct = 0.0;
    double angle_degrees = 0.0;
    double kl_to_uniform = 0.0;
};

// k_pct must lie in (0, 50]; the worst/best groups hold ceil(k_pct*K/100)
// clients. Throws on an empty or all-zero accuracy vector (angle and KL are
// undefined at the zero vector).
FairnessReport fairness_report(std::span<const double> accuracies, double k_pct);

std::string fairness_csv_header();
std::string fairness_csv_row(const FairnessReport& r);

}  // namespace adafed
