#include "adafed/outputs.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>

#include "json.hpp"

namespace adafed {
namespace {

using nlohmann::json;

// Fairness fields for one round, or NaN when undefined (regression models,
// or an all-zero accuracy vector).
FairnessReport round_fairness(const RoundRecord& rec, bool* defined) {
    *defined = false;
    if (rec.per_client_accuracy.empty()) return {};
    std::vector<double> accs;
    accs.reserve(rec.per_client_accuracy.size());
    double total = 0.0;
    for (const auto& [cid, a] : rec.per_client_accuracy) {
        accs.push_back(a);
        total += a;
    }
    if (total == 0.0) return {};
    *defined = true;
    return fairness_report(accs, 10.0);
}

json fairness_to_json(const FairnessReport& r) {
    return json{{"mean_accuracy", r.mean_accuracy}, {"std_accuracy", r.std_accuracy},
                {"worst_k_pct", r.worst_k_pct},     {"best_k_pct", r.best_k_pct},
                {"angle_degrees", r.angle_degrees}, {"kl_to_uniform", r.kl_to_uniform}};
}

}  // namespace

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_rounds_csv(const std::vector<RoundRecord>& records, std::ostream& os) {
    os << "round,global_lr,direction_norm,rho,mean_loss,mean_acc,std_acc,worst10,best10,angle,kl,"
          "dropped_count\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const RoundRecord& rec : records) {
        double mean_loss = 0.0;
        for (const auto& [cid, f] : rec.per_client_loss) mean_loss += f;
        if (!rec.per_client_loss.empty()) mean_loss /= static_cast<double>(rec.per_client_loss.size());

        bool defined = false;
        const FairnessReport fr = round_fairness(rec, &defined);
        os << rec.round << ',' << fmt_real(rec.global_lr) << ',' << fmt_real(rec.direction_norm)
           << ',' << fmt_real(rec.rho) << ',' << fmt_real(mean_loss) << ','
           << fmt_real(defined ? fr.mean_accuracy : nan) << ','
           << fmt_real(defined ? fr.std_accuracy : nan) << ','
           << fmt_real(defined ? fr.worst_k_pct : nan) << ','
           << fmt_real(defined ? fr.best_k_pct : nan) << ','
           << fmt_real(defined ? fr.angle_degrees : nan) << ','
           << fmt_real(defined ? fr.kl_to_uniform : nan) << ',' << rec.dropped.size() << "\n";
    }
}

void write_lambda_csv(const std::vector<RoundRecord>& records, std::ostream& os) {
    os << "round,client_id,lambda\n";
    for (const RoundRecord& rec : records)
        for (std::size_t i = 0; i < rec.sampled.size(); ++i)
            os << rec.round << ',' << rec.sampled[i] << ',' << fmt_real(rec.lambda[i]) << "\n";
}

std::string summary_json(const ConfigDoc& doc, const RunManifest& manifest,
                         const std::vector<RoundRecord>& records,
                         const FairnessReport* final_fairness, double final_mean_loss) {
    json config_echo = json::object();
    for (const auto& [section, keys] : doc.sections) {
        json sec = json::object();
        for (const auto& [key, entry] : keys) sec[key] = entry.value;
        config_echo[section] = sec;
    }
    json out{
        {"config_hash", manifest.config_hash},
        {"config", config_echo},
        {"manifest",
         {{"seeds", manifest.seeds},
          {"output_dir", manifest.output_dir},
          {"started", manifest.started},
          {"finished", manifest.finished}}},
        {"rounds", records.size()},
        {"final_mean_loss", final_mean_loss},
    };
    out["final_fairness"] = final_fairness ? fairness_to_json(*final_fairness) : json(nullptr);
    if (!records.empty()) {
        out["final_direction_norm"] = records.back().direction_norm;
        out["final_rho"] = records.back().rho;
    }
    return out.dump(2) + "\n";
}

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& os) {
    os << "aggregator,mean_acc_mean,mean_acc_std,std_acc_mean,std_acc_std,worst_mean,worst_std,"
          "best_mean,best_std,angle_mean,angle_std,kl_mean,kl_std\n";
    for (const CompareRow& r : rows) {
        os << r.aggregator << ',' << fmt_real(r.mean.mean_accuracy) << ','
           << fmt_real(r.stddev.mean_accuracy) << ',' << fmt_real(r.mean.std_accuracy) << ','
           << fmt_real(r.stddev.std_accuracy) << ',' << fmt_real(r.mean.worst_k_pct) << ','
           << fmt_real(r.stddev.worst_k_pct) << ',' << fmt_real(r.mean.best_k_pct) << ','
           << fmt_real(r.stddev.best_k_pct) << ',' << fmt_real(r.mean.angle_degrees) << ','
           << fmt_real(r.stddev.angle_degrees) << ',' << fmt_real(r.mean.kl_to_uniform) << ','
           << fmt_real(r.stddev.kl_to_uniform) << "\n";
    }
}

std::string aggregation_json(const AggregationResult& result) {
    json out{
        {"orthogonal_gradients", result.orthogonal_gradients},
        {"lambda", result.lambda},
        {"alpha", result.alpha},
        {"direction", result.direction},
        {"dropped_clients", result.dropped_clients},
        {"retained_clients", result.retained_clients},
        {"negative_denominator_clients", result.negative_denominator_clients},
    };
    return out.dump();
}

std::string fairness_json(const FairnessReport& report) {
    return fairness_to_json(report).dump();
}

std::string iso_timestamp_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace adafed
