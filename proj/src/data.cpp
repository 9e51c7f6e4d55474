#include "adafed/data.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "adafed/rng.hpp"

namespace adafed {
namespace {

std::vector<Dataset> materialize(const Dataset& data,
                                 const std::vector<std::vector<int>>& assignment) {
    std::vector<Dataset> clients(assignment.size());
    for (std::size_t k = 0; k < assignment.size(); ++k) {
        clients[k].feature_dim = data.feature_dim;
        for (int i : assignment[k]) clients[k].push_row(data.row(i), data.labels[static_cast<std::size_t>(i)]);
    }
    return clients;
}

std::vector<Dataset> partition_shards(const Dataset& data, const PartitionSpec& spec) {
    const int n = data.size();
    const int total_shards = spec.num_clients * spec.shards_per_client;
    if (n % total_shards != 0)
        throw std::invalid_argument("shards partition: sample count " + std::to_string(n) +
                                    " is not divisible by " + std::to_string(total_shards) +
                                    " shards");
    const int shard_size = n / total_shards;

    // Label-sorted order, stable in the original index for determinism.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return data.labels[static_cast<std::size_t>(a)] < data.labels[static_cast<std::size_t>(b)];
    });

    std::vector<int> shard_ids(static_cast<std::size_t>(total_shards));
    std::iota(shard_ids.begin(), shard_ids.end(), 0);
    Rng rng(derive_seed(spec.seed, 0x54a7d5));
    rng.shuffle(shard_ids);

    std::vector<std::vector<int>> assignment(static_cast<std::size_t>(spec.num_clients));
    for (int k = 0; k < spec.num_clients; ++k) {
        for (int s = 0; s < spec.shards_per_client; ++s) {
            const int shard = shard_ids[static_cast<std::size_t>(k * spec.shards_per_client + s)];
            for (int i = 0; i < shard_size; ++i)
                assignment[static_cast<std::size_t>(k)].push_back(
                    order[static_cast<std::size_t>(shard * shard_size + i)]);
        }
        auto& a = assignment[static_cast<std::size_t>(k)];
        std::sort(a.begin(), a.end());
    }
    return materialize(data, assignment);
}

std::vector<Dataset> partition_dirichlet(const Dataset& data, const PartitionSpec& spec) {
    const int n = data.size();
    const int k_clients = spec.num_clients;
    int num_classes = 0;
    for (int i = 0; i < n; ++i)
        num_classes = std::max(num_classes, static_cast<int>(data.labels[static_cast<std::size_t>(i)]) + 1);

    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng(derive_seed(spec.seed, 0xd112c8, static_cast<std::uint64_t>(attempt)));
        std::vector<std::vector<int>> assignment(static_cast<std::size_t>(k_clients));
        for (int c = 0; c < num_classes; ++c) {
            const auto p = rng.dirichlet(spec.beta, k_clients);
            std::vector<double> cdf(p.size());
            std::partial_sum(p.begin(), p.end(), cdf.begin());
            for (int i = 0; i < n; ++i) {
                if (static_cast<int>(data.labels[static_cast<std::size_t>(i)]) != c) continue;
                const double u = rng.uniform();
                const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
                const int k = std::min<int>(static_cast<int>(it - cdf.begin()), k_clients - 1);
                assignment[static_cast<std::size_t>(k)].push_back(i);
            }
        }
        const bool any_empty = std::any_of(assignment.begin(), assignment.end(),
                                           [](const auto& a) { return a.empty(); });
        if (!any_empty) return materialize(data, assignment);
    }
    throw std::runtime_error("dirichlet partition: a client stayed empty after 100 redraws");
}

std::vector<Dataset> partition_by_cluster(const Dataset& data, const PartitionSpec& spec) {
    std::vector<std::vector<int>> assignment(static_cast<std::size_t>(spec.num_clients));
    for (int i = 0; i < data.size(); ++i) {
        const int c = static_cast<int>(data.labels[static_cast<std::size_t>(i)]);
        assignment[static_cast<std::size_t>(c % spec.num_clients)].push_back(i);
    }
    for (const auto& a : assignment)
        if (a.empty())
            throw std::invalid_argument("by_cluster partition: more clients than clusters leaves a client empty");
    return materialize(data, assignment);
}

}  // namespace

Dataset generate_synthetic(const SyntheticTaskSpec& spec) {
    if (spec.num_classes < 1 || spec.input_dim < 1 || spec.samples_per_class < 1)
        throw std::invalid_argument("synthetic task: dimensions must be positive");
    if (spec.label_noise < 0.0 || spec.label_noise >= 1.0)
        throw std::invalid_argument("synthetic task: label_noise must lie in [0, 1)");
    if (spec.cluster_spread <= 0.0)
        throw std::invalid_argument("synthetic task: cluster_spread must be positive");

    Rng rng(derive_seed(spec.seed, 0x5e7a));
    std::vector<double> means(static_cast<std::size_t>(spec.num_classes) * spec.input_dim);
    for (double& m : means) m = 3.0 * rng.normal();

    Dataset out;
    out.feature_dim = spec.input_dim;
    std::vector<double> x(static_cast<std::size_t>(spec.input_dim));
    for (int c = 0; c < spec.num_classes; ++c) {
        for (int s = 0; s < spec.samples_per_class; ++s) {
            for (int j = 0; j < spec.input_dim; ++j)
                x[static_cast<std::size_t>(j)] =
                    means[static_cast<std::size_t>(c) * spec.input_dim + j] +
                    spec.cluster_spread * rng.normal();
            int label = c;
            if (spec.num_classes > 1 && rng.uniform() < spec.label_noise) {
                const int offset = 1 + static_cast<int>(rng.uniform_below(
                                           static_cast<std::uint64_t>(spec.num_classes - 1)));
                label = (c + offset) % spec.num_classes;
            }
            out.push_row(x, static_cast<double>(label));
        }
    }
    return out;
}

std::vector<Dataset> partition(const Dataset& data, const PartitionSpec& spec) {
    if (spec.num_clients < 1) throw std::invalid_argument("partition: num_clients must be >= 1");
    if (data.size() < 1) throw std::invalid_argument("partition: empty dataset");
    switch (spec.kind) {
        case PartitionKind::Shards:
            if (spec.shards_per_client < 1)
                throw std::invalid_argument("partition: shards_per_client must be >= 1");
            return partition_shards(data, spec);
        case PartitionKind::Dirichlet:
            if (spec.beta <= 0.0) throw std::invalid_argument("partition: beta must be positive");
            return partition_dirichlet(data, spec);
        case PartitionKind::ByCluster:
            return partition_by_cluster(data, spec);
    }
    throw std::logic_error("unreachable partition kind");
}

void write_partition_csv(const std::vector<Dataset>& clients, std::ostream& os) {
    const int dim = clients.empty() ? 0 : clients.front().feature_dim;
    os << "client_id,label";
    for (int j = 0; j < dim; ++j) os << ",f" << j;
    os << "\n";
    char buf[64];
    for (std::size_t k = 0; k < clients.size(); ++k) {
        const Dataset& d = clients[k];
        for (int i = 0; i < d.size(); ++i) {
            os << k;
            std::snprintf(buf, sizeof buf, ",%.17g", d.labels[static_cast<std::size_t>(i)]);
            os << buf;
            for (double v : d.row(i)) {
                std::snprintf(buf, sizeof buf, ",%.17g", v);
                os << buf;
            }
            os << "\n";
        }
    }
}

}  // namespace adafed
