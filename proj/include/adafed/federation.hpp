#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "adafed/aggregation.hpp"
#include "adafed/data.hpp"
#include "adafed/dataset.hpp"
#include "adafed/models.hpp"
#include "adafed/vec.hpp"

namespace adafed {

// Global step-size schedules. Constant keeps base; InverseT gives base/(t+1)
// and InverseSqrtT base/sqrt(t+1), both of which have divergent partial sums
// with a vanishing last term. DescentBound ignores the round index and
// resolves per round to step_size_bound(losses, gamma, base) with base
// interpreted as the smoothness constant L.
enum class ScheduleKind { Constant, InverseT, InverseSqrtT, DescentBound };

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::Constant;
    double base = 1.0;
};

// Closed-form schedules only; DescentBound needs the round's losses.
double schedule_rate(const ScheduleSpec& spec, int round);

enum class LocalOptimizer { GD, SGD };

struct LocalTrainResult {
    ParamVector pseudo_gradient;  // theta_init - theta_final (not divided by lr)
    double final_loss = 0.0;      // loss at theta_final on the full local dataset
};

// e epochs of full-batch GD or shuffled minibatch SGD from `params`.
LocalTrainResult local_train(const ModelSpec& spec, const ParamVector& params,
                             const Dataset& data, int epochs, double lr, LocalOptimizer optimizer,
                             int batch_size, std::uint64_t seed);

struct FederatedConfig {
    ModelSpec model;
    SyntheticTaskSpec task;
    PartitionSpec partition;
    AggregatorSpec aggregator;
    int rounds = 1;
    int local_epochs = 1;
    double local_lr = 0.1;
    ScheduleSpec global_lr_schedule;
    LocalOptimizer local_optimizer = LocalOptimizer::GD;
    int batch_size = 32;
    double participation_fraction = 1.0;
    std::uint64_t seed = 0;
    int checkpoint_every = 0;  // 0 disables checkpointing
    std::string checkpoint_dir;
};

struct RoundRecord {
    int round = 0;
    std::map<int, double> per_client_loss;      // at theta_{t+1}
    std::map<int, double> per_client_accuracy;  // classification kinds only
    double direction_norm = 0.0;
    double rho = 0.0;
    std::vector<double> lambda;  // aligned with `sampled`; 0 for dropped clients
    std::vector<int> sampled;    // participating ids, ascending
    std::vector<int> dropped;
    double global_lr = 0.0;
    bool aborted = false;  // aggregation degenerated; model left unchanged
};

// A fully resolved run: data already partitioned into per-client datasets.
// run_experiment() builds one of these from a FederatedConfig; tests build
// them directly when they need handcrafted client data.
struct Experiment {
    ModelSpec model;
    std::vector<Dataset> clients;
    AggregatorSpec aggregator;
    ScheduleSpec schedule;
    int local_epochs = 1;
    double local_lr = 0.1;
    LocalOptimizer local_optimizer = LocalOptimizer::GD;
    int batch_size = 32;
    double participation_fraction = 1.0;
    std::uint64_t seed = 0;
};

// One communication round: sample ceil(participation * K) clients without
// replacement, train locally (clients may run concurrently; aggregation
// consumes updates in ascending client id), aggregate, and step the global
// model. Per-client seeds derive from (seed, round, client_id).
RoundRecord run_round(const Experiment& exp, ParamVector& params, int round);

std::vector<RoundRecord> run_rounds(
    const Experiment& exp, ParamVector& params, int rounds,
    const std::function<void(int, const ParamVector&)>& after_round = {});

Experiment build_experiment(const FederatedConfig& config);

// Generate data, partition, init params, run config.rounds rounds.
// Deterministic in config.seed; writes checkpoints when configured.
std::vector<RoundRecord> run_experiment(const FederatedConfig& config);

// Fraction of clients whose loss did not increase. Key sets must match.
double rho(const std::map<int, double>& losses_before, const std::map<int, double>& losses_after);

struct ClientEvaluation {
    std::map<int, double> losses;
    std::map<int, double> accuracies;  // empty for regression kinds
};

// Loss (and accuracy, when defined) of `params` on every client's dataset.
ClientEvaluation evaluate_clients(const Experiment& exp, const ParamVector& params);

// Flat little-endian checkpoint: u64 length prefix then 64-bit reals.
void write_checkpoint(const ParamVector& params, const std::string& path);
ParamVector read_checkpoint(const std::string& path);

void validate(const FederatedConfig& config);

}  // namespace adafed
