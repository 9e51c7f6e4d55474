#include "adafed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace adafed {

FairnessReport fairness_report(std::span<const double> accuracies, double k_pct) {
    const std::size_t k = accuracies.size();
    if (k == 0) throw std::invalid_argument("fairness_report: empty accuracy list");
    if (!(k_pct > 0.0 && k_pct <= 50.0))
        throw std::invalid_argument("fairness_report: k_pct must lie in (0, 50]");

    FairnessReport r;
    double sum = 0.0;
    for (double a : accuracies) sum += a;
    if (sum == 0.0)
        throw std::invalid_argument("fairness_report: all-zero accuracy vector");
    r.mean_accuracy = sum / static_cast<double>(k);

    double var = 0.0;
    for (double a : accuracies) var += (a - r.mean_accuracy) * (a - r.mean_accuracy);
    r.std_accuracy = std::sqrt(var / static_cast<double>(k));

    std::vector<double> sorted(accuracies.begin(), accuracies.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t group =
        static_cast<std::size_t>(std::ceil(k_pct * static_cast<double>(k) / 100.0));
    r.worst_k_pct = std::accumulate(sorted.begin(), sorted.begin() + group, 0.0) /
                    static_cast<double>(group);
    r.best_k_pct = std::accumulate(sorted.end() - group, sorted.end(), 0.0) /
                   static_cast<double>(group);

    const double nrm = std::sqrt(std::inner_product(sorted.begin(), sorted.end(), sorted.begin(), 0.0));
    double cosine = sum / (nrm * std::sqrt(static_cast<double>(k)));
    cosine = std::clamp(cosine, -1.0, 1.0);
    r.angle_degrees = std::acos(cosine) * 180.0 / 3.14159265358979323846;

    double kl = 0.0;
    for (double a : accuracies) {
        const double p = a / sum;
        if (p > 0.0) kl += p * std::log(p * static_cast<double>(k));
    }
    r.kl_to_uniform = std::max(kl, 0.0);
    return r;
}

std::string fairness_csv_header() {
    return "mean_accuracy,std_accuracy,worst_k_pct,best_k_pct,angle_degrees,kl_to_uniform";
}

std::string fairness_csv_row(const FairnessReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.mean_accuracy,
                  r.std_accuracy, r.worst_k_pct, r.best_k_pct, r.angle_degrees, r.kl_to_uniform);
    return buf;
}

}  // namespace adafed
