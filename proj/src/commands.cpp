#include "adafed/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "adafed/checks.hpp"
#include "adafed/config.hpp"
#include "adafed/log.hpp"
#include "adafed/outputs.hpp"

namespace adafed {
namespace {

namespace fs = std::filesystem;

struct RunArtifacts {
    std::vector<RoundRecord> records;
    ClientEvaluation final_eval;  // over all clients at the final model
};

// The driving loop behind both commands; throws with round context.
RunArtifacts execute(const FederatedConfig& config) {
    Experiment exp = build_experiment(config);
    ParamVector params = init_params(config.model, config.seed);
    RunArtifacts out;
    out.records.reserve(static_cast<std::size_t>(config.rounds));
    for (int t = 0; t < config.rounds; ++t) {
        try {
            out.records.push_back(run_round(exp, params, t));
        } catch (const std::exception& e) {
            throw std::runtime_error("round " + std::to_string(t) + ": " + e.what());
        }
        if (config.checkpoint_every > 0 && (t + 1) % config.checkpoint_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "/checkpoint_%06d.bin", t + 1);
            write_checkpoint(params, config.checkpoint_dir + name);
        }
        log::info("round %d/%d |d|=%.4e rho=%.3f", t + 1, config.rounds,
                  out.records.back().direction_norm, out.records.back().rho);
    }
    out.final_eval = evaluate_clients(exp, params);
    return out;
}

std::optional<FairnessReport> final_fairness(const ClientEvaluation& eval) {
    if (eval.accuracies.empty()) return std::nullopt;
    std::vector<double> accs;
    double total = 0.0;
    for (const auto& [cid, a] : eval.accuracies) {
        accs.push_back(a);
        total += a;
    }
    if (total == 0.0) return std::nullopt;
    return fairness_report(accs, 10.0);
}

double mean_loss(const ClientEvaluation& eval) {
    double acc = 0.0;
    for (const auto& [cid, f] : eval.losses) acc += f;
    return eval.losses.empty() ? 0.0 : acc / static_cast<double>(eval.losses.size());
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << contents;
}

FederatedConfig with_seed(FederatedConfig config, std::uint64_t seed) {
    config.task.seed = seed;
    config.partition.seed = seed;
    config.seed = seed;
    return config;
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override) {
    ConfigDoc doc;
    FederatedConfig config;
    try {
        doc = load_config_file(config_path);
        config = config_from_doc(doc);
    } catch (const std::exception& e) {
        log::error("config: %s", e.what());
        return 2;
    }
    if (seed_override) config = with_seed(config, *seed_override);

    RunManifest manifest;
    manifest.config_hash = canonical_hash(doc);
    manifest.seeds = {config.seed};
    const fs::path run_dir =
        fs::path(out_dir) / (manifest.config_hash + "-s" + std::to_string(config.seed));
    manifest.output_dir = run_dir.string();
    manifest.started = iso_timestamp_utc();

    try {
        fs::create_directories(run_dir);
        if (config.checkpoint_every > 0) config.checkpoint_dir = run_dir.string();
        const RunArtifacts art = execute(config);
        manifest.finished = iso_timestamp_utc();

        std::ofstream rounds(run_dir / "rounds.csv", std::ios::binary);
        write_rounds_csv(art.records, rounds);
        std::ofstream lambda(run_dir / "lambda.csv", std::ios::binary);
        write_lambda_csv(art.records, lambda);
        const auto fairness = final_fairness(art.final_eval);
        write_file(run_dir / "summary.json",
                   summary_json(doc, manifest, art.records, fairness ? &*fairness : nullptr,
                                mean_loss(art.final_eval)));
    } catch (const std::exception& e) {
        log::error("run failed: %s", e.what());
        return 3;
    }
    std::printf("%s\n", run_dir.string().c_str());
    return 0;
}

int cmd_compare(const std::string& config_path, const std::vector<std::string>& aggregators,
                const std::vector<std::uint64_t>& seeds, const std::string& out_dir) {
    ConfigDoc doc;
    FederatedConfig base;
    std::vector<AggregatorOverride> specs;
    try {
        if (aggregators.size() < 2)
            throw ConfigError("compare needs at least two aggregators");
        if (seeds.empty()) throw ConfigError("compare needs at least one seed");
        doc = load_config_file(config_path);
        base = config_from_doc(doc);
        for (const std::string& token : aggregators)
            specs.push_back(
                parse_aggregator_token(token, base.aggregator, base.global_lr_schedule));
    } catch (const std::exception& e) {
        log::error("config: %s", e.what());
        return 2;
    }

    const std::size_t n_runs = aggregators.size() * seeds.size();
    std::vector<FairnessReport> reports(n_runs);
    std::vector<std::string> errors(n_runs);
    // Seed/aggregator runs are independent; each writes only its own files.
#pragma omp parallel for schedule(dynamic)
    for (int run = 0; run < static_cast<int>(n_runs); ++run) {
        const std::size_t a = static_cast<std::size_t>(run) / seeds.size();
        const std::size_t s = static_cast<std::size_t>(run) % seeds.size();
        try {
            FederatedConfig config = with_seed(base, seeds[s]);
            config.aggregator = specs[a].aggregator;
            if (specs[a].schedule) config.global_lr_schedule = *specs[a].schedule;
            const RunArtifacts art = execute(config);
            const auto fairness = final_fairness(art.final_eval);
            if (!fairness)
                throw std::runtime_error("fairness comparison requires a classification model");
            reports[static_cast<std::size_t>(run)] = *fairness;

            const fs::path run_dir = fs::path(out_dir) / (aggregators[a] + "-s" + std::to_string(seeds[s]));
            fs::create_directories(run_dir);
            std::ofstream rounds(run_dir / "rounds.csv", std::ios::binary);
            write_rounds_csv(art.records, rounds);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(run)] = e.what();
        }
    }
    for (const std::string& err : errors)
        if (!err.empty()) {
            log::error("compare run failed: %s", err.c_str());
            return 3;
        }

    // Merge step: per-aggregator mean and population std across seeds.
    std::vector<CompareRow> rows;
    for (std::size_t a = 0; a < aggregators.size(); ++a) {
        CompareRow row;
        row.aggregator = aggregators[a];
        auto field = [&](double FairnessReport::*member, double& mean_out, double& std_out) {
            double mean = 0.0;
            for (std::size_t s = 0; s < seeds.size(); ++s)
                mean += reports[a * seeds.size() + s].*member;
            mean /= static_cast<double>(seeds.size());
            double var = 0.0;
            for (std::size_t s = 0; s < seeds.size(); ++s) {
                const double dev = reports[a * seeds.size() + s].*member - mean;
                var += dev * dev;
            }
            mean_out = mean;
            std_out = std::sqrt(var / static_cast<double>(seeds.size()));
        };
        field(&FairnessReport::mean_accuracy, row.mean.mean_accuracy, row.stddev.mean_accuracy);
        field(&FairnessReport::std_accuracy, row.mean.std_accuracy, row.stddev.std_accuracy);
        field(&FairnessReport::worst_k_pct, row.mean.worst_k_pct, row.stddev.worst_k_pct);
        field(&FairnessReport::best_k_pct, row.mean.best_k_pct, row.stddev.best_k_pct);
        field(&FairnessReport::angle_degrees, row.mean.angle_degrees, row.stddev.angle_degrees);
        field(&FairnessReport::kl_to_uniform, row.mean.kl_to_uniform, row.stddev.kl_to_uniform);
        rows.push_back(row);
    }
    try {
        fs::create_directories(out_dir);
        std::ofstream os(fs::path(out_dir) / "compare.csv", std::ios::binary);
        if (!os) throw std::runtime_error("cannot write compare.csv");
        write_compare_csv(rows, os);
    } catch (const std::exception& e) {
        log::error("compare merge failed: %s", e.what());
        return 3;
    }
    return 0;
}

int cmd_verify() {
    const std::vector<CheckResult> results = run_all_checks(0xadafed);
    bool all_pass = true;
    for (const CheckResult& r : results) {
        std::printf("[%s] %-34s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace adafed
