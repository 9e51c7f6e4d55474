#include "adafed/federation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "adafed/log.hpp"
#include "adafed/rng.hpp"

namespace adafed {
namespace {

constexpr std::uint64_t kSamplerTag = 0x9a3f;

double aggregator_gamma(const AggregatorSpec& spec) {
    return spec.kind == AggregatorKind::AdaFed ? spec.gamma : 0.0;
}

void write_u64_le(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

double schedule_rate(const ScheduleSpec& spec, int round) {
    switch (spec.kind) {
        case ScheduleKind::Constant:
            return spec.base;
        case ScheduleKind::InverseT:
            return spec.base / static_cast<double>(round + 1);
        case ScheduleKind::InverseSqrtT:
            return spec.base / std::sqrt(static_cast<double>(round + 1));
        case ScheduleKind::DescentBound:
            throw std::logic_error("DescentBound resolves per round from client losses");
    }
    throw std::logic_error("unreachable schedule kind");
}

LocalTrainResult local_train(const ModelSpec& spec, const ParamVector& params,
                             const Dataset& data, int epochs, double lr, LocalOptimizer optimizer,
                             int batch_size, std::uint64_t seed) {
    if (epochs < 1) throw std::invalid_argument("local_train: epochs must be >= 1");
    if (lr < 0.0) throw std::invalid_argument("local_train: negative learning rate");
    validate_params(spec, params);

    // The accumulated update IS the pseudo-gradient (theta_init - theta_final);
    // keeping it explicitly makes the single-epoch case exactly lr * gradient.
    ParamVector accum(params.size(), 0.0);
    ParamVector theta = params;
    auto apply = [&] {
        for (std::size_t i = 0; i < params.size(); ++i) theta[i] = params[i] - accum[i];
    };
    if (optimizer == LocalOptimizer::GD) {
        for (int e = 0; e < epochs; ++e) {
            const ParamVector g = gradient(spec, theta, data);
            axpy(lr, g, accum);
            apply();
        }
    } else {
        if (batch_size < 1) throw std::invalid_argument("local_train: batch_size must be >= 1");
        Rng rng(derive_seed(seed, 0x5d70));
        std::vector<int> order(static_cast<std::size_t>(data.size()));
        std::iota(order.begin(), order.end(), 0);
        for (int e = 0; e < epochs; ++e) {
            rng.shuffle(order);
            for (std::size_t start = 0; start < order.size(); start += batch_size) {
                const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
                const ParamVector g = gradient_on(
                    spec, theta, data, {order.data() + start, stop - start});
                axpy(lr, g, accum);
                apply();
            }
        }
    }

    LocalTrainResult out;
    out.pseudo_gradient = std::move(accum);
    out.final_loss = loss(spec, theta, data);
    return out;
}

RoundRecord run_round(const Experiment& exp, ParamVector& params, int round) {
    const int num_clients = static_cast<int>(exp.clients.size());
    const int m = std::clamp(
        static_cast<int>(std::ceil(exp.participation_fraction * num_clients)), 1, num_clients);

    Rng sampler(derive_seed(exp.seed, static_cast<std::uint64_t>(round), kSamplerTag));
    RoundRecord rec;
    rec.round = round;
    rec.sampled = sampler.sample_without_replacement(num_clients, m);

    std::vector<double> losses_before(static_cast<std::size_t>(m));
    std::vector<ClientUpdate> updates(static_cast<std::size_t>(m));
    // Clients are independent given (params, D_k, per-client seed); results go
    // into per-client slots so the outcome does not depend on thread order.
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const int cid = rec.sampled[static_cast<std::size_t>(i)];
        const Dataset& local = exp.clients[static_cast<std::size_t>(cid)];
        losses_before[static_cast<std::size_t>(i)] = loss(exp.model, params, local);
        LocalTrainResult tr = local_train(
            exp.model, params, local, exp.local_epochs, exp.local_lr, exp.local_optimizer,
            exp.batch_size,
            derive_seed(exp.seed, static_cast<std::uint64_t>(round),
                        static_cast<std::uint64_t>(cid)));
        ClientUpdate& u = updates[static_cast<std::size_t>(i)];
        u.client_id = cid;
        u.gradient = std::move(tr.pseudo_gradient);
        u.loss = tr.final_loss;
        u.num_samples = local.size();
    }

    std::vector<double> reported_losses(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) reported_losses[static_cast<std::size_t>(i)] = updates[static_cast<std::size_t>(i)].loss;

    const double eta =
        exp.schedule.kind == ScheduleKind::DescentBound
            ? step_size_bound(reported_losses, aggregator_gamma(exp.aggregator), exp.schedule.base)
            : schedule_rate(exp.schedule, round);
    rec.global_lr = eta;

    try {
        AggregationResult agg;
        switch (exp.aggregator.kind) {
            case AggregatorKind::AdaFed:
                agg = adafed_direction(updates, exp.aggregator);
                break;
            case AggregatorKind::FedAvg:
                agg = fedavg_direction(updates, exp.aggregator.fedavg_weights);
                break;
            case AggregatorKind::MgdaMinNorm: {
                std::vector<ParamVector> grads;
                grads.reserve(updates.size());
                for (const auto& u : updates) grads.push_back(u.gradient);
                MinNormResult mn = min_norm_in_hull(grads);
                if (!mn.converged)
                    log::info("round %d: min-norm solver stopped at gap %.3e", round, mn.gap);
                agg.direction = std::move(mn.combination);
                agg.lambda = std::move(mn.lambda);
                for (const auto& u : updates) agg.retained_clients.push_back(u.client_id);
                break;
            }
        }
        rec.direction_norm = norm(agg.direction);
        rec.dropped = agg.dropped_clients;
        rec.lambda.assign(static_cast<std::size_t>(m), 0.0);
        for (std::size_t j = 0; j < agg.retained_clients.size(); ++j) {
            const auto it = std::lower_bound(rec.sampled.begin(), rec.sampled.end(),
                                             agg.retained_clients[j]);
            rec.lambda[static_cast<std::size_t>(it - rec.sampled.begin())] = agg.lambda[j];
        }
        axpy(-eta, agg.direction, params);
    } catch (const AllClientsDroppedError&) {
        rec.aborted = true;
        rec.dropped = rec.sampled;
        rec.lambda.assign(static_cast<std::size_t>(m), 0.0);
        log::info("round %d: aggregation degenerated for all clients; model unchanged", round);
    }

    for (int i = 0; i < m; ++i) {
        const int cid = rec.sampled[static_cast<std::size_t>(i)];
        const Dataset& local = exp.clients[static_cast<std::size_t>(cid)];
        rec.per_client_loss[cid] = loss(exp.model, params, local);
        if (is_classifier(exp.model.kind))
            rec.per_client_accuracy[cid] = accuracy(exp.model, params, local);
    }
    int improved = 0;
    for (int i = 0; i < m; ++i) {
        const int cid = rec.sampled[static_cast<std::size_t>(i)];
        if (rec.per_client_loss[cid] <= losses_before[static_cast<std::size_t>(i)]) ++improved;
    }
    rec.rho = static_cast<double>(improved) / static_cast<double>(m);
    return rec;
}

std::vector<RoundRecord> run_rounds(const Experiment& exp, ParamVector& params, int rounds,
                                    const std::function<void(int, const ParamVector&)>& after_round) {
    std::vector<RoundRecord> records;
    records.reserve(static_cast<std::size_t>(std::max(rounds, 0)));
    for (int t = 0; t < rounds; ++t) {
        records.push_back(run_round(exp, params, t));
        log::debug("round %d: |d|=%.6e rho=%.3f lr=%.3e", t, records.back().direction_norm,
                   records.back().rho, records.back().global_lr);
        if (after_round) after_round(t, params);
    }
    return records;
}

void validate(const FederatedConfig& config) {
    if (config.rounds < 0) throw std::invalid_argument("config: rounds must be >= 0");
    if (config.local_epochs < 1) throw std::invalid_argument("config: local_epochs must be >= 1");
    if (config.local_lr <= 0.0) throw std::invalid_argument("config: local_lr must be positive");
    if (config.global_lr_schedule.base <= 0.0)
        throw std::invalid_argument("config: schedule base must be positive");
    if (config.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (!(config.participation_fraction > 0.0 && config.participation_fraction <= 1.0))
        throw std::invalid_argument("config: participation_fraction must lie in (0, 1]");
    if (config.participation_fraction * config.partition.num_clients < 1.0)
        throw std::invalid_argument("config: participation_fraction * num_clients must be >= 1");
    if (config.model.input_dim != config.task.input_dim)
        throw std::invalid_argument("config: model input_dim must match task input_dim");
    if (is_classifier(config.model.kind) && config.model.output_dim != config.task.num_classes)
        throw std::invalid_argument("config: classifier output_dim must match task num_classes");
    if (config.checkpoint_every < 0)
        throw std::invalid_argument("config: checkpoint_every must be >= 0");
}

Experiment build_experiment(const FederatedConfig& config) {
    validate(config);
    Experiment exp;
    exp.model = config.model;
    exp.clients = partition(generate_synthetic(config.task), config.partition);
    exp.aggregator = config.aggregator;
    exp.schedule = config.global_lr_schedule;
    exp.local_epochs = config.local_epochs;
    exp.local_lr = config.local_lr;
    exp.local_optimizer = config.local_optimizer;
    exp.batch_size = config.batch_size;
    exp.participation_fraction = config.participation_fraction;
    exp.seed = config.seed;
    return exp;
}

std::vector<RoundRecord> run_experiment(const FederatedConfig& config) {
    Experiment exp = build_experiment(config);
    ParamVector params = init_params(config.model, config.seed);
    std::function<void(int, const ParamVector&)> after;
    if (config.checkpoint_every > 0) {
        after = [&config](int t, const ParamVector& p) {
            if ((t + 1) % config.checkpoint_every == 0) {
                char name[64];
                std::snprintf(name, sizeof name, "/checkpoint_%06d.bin", t + 1);
                write_checkpoint(p, config.checkpoint_dir + name);
            }
        };
    }
    return run_rounds(exp, params, config.rounds, after);
}

double rho(const std::map<int, double>& losses_before, const std::map<int, double>& losses_after) {
    if (losses_before.size() != losses_after.size())
        throw std::invalid_argument("rho: key sets differ");
    if (losses_before.empty()) throw std::invalid_argument("rho: empty loss maps");
    int improved = 0;
    for (const auto& [cid, before] : losses_before) {
        const auto it = losses_after.find(cid);
        if (it == losses_after.end()) throw std::invalid_argument("rho: key sets differ");
        if (it->second <= before) ++improved;
    }
    return static_cast<double>(improved) / static_cast<double>(losses_before.size());
}

ClientEvaluation evaluate_clients(const Experiment& exp, const ParamVector& params) {
    const int num_clients = static_cast<int>(exp.clients.size());
    std::vector<double> ls(static_cast<std::size_t>(num_clients));
    std::vector<double> as(static_cast<std::size_t>(num_clients));
    const bool classify = is_classifier(exp.model.kind);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < num_clients; ++c) {
        ls[static_cast<std::size_t>(c)] = loss(exp.model, params, exp.clients[static_cast<std::size_t>(c)]);
        if (classify)
            as[static_cast<std::size_t>(c)] =
                accuracy(exp.model, params, exp.clients[static_cast<std::size_t>(c)]);
    }
    ClientEvaluation out;
    for (int c = 0; c < num_clients; ++c) {
        out.losses[c] = ls[static_cast<std::size_t>(c)];
        if (classify) out.accuracies[c] = as[static_cast<std::size_t>(c)];
    }
    return out;
}

void write_checkpoint(const ParamVector& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint file for writing: " + path);
    write_u64_le(os, params.size());
    for (double v : params) write_u64_le(os, std::bit_cast<std::uint64_t>(v));
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

ParamVector read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint file: " + path);
    const std::uint64_t n = read_u64_le(is);
    ParamVector params(n);
    for (std::uint64_t i = 0; i < n; ++i) params[i] = std::bit_cast<double>(read_u64_le(is));
    if (!is) throw std::runtime_error("checkpoint truncated: " + path);
    return params;
}

}  // namespace adafed
