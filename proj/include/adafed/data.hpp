#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "adafed/dataset.hpp"

namespace adafed {

enum class PartitionKind { Shards, Dirichlet, ByCluster };

struct PartitionSpec {
    PartitionKind kind = PartitionKind::Dirichlet;
    int num_clients = 1;
    int shards_per_client = 2;  // Shards only
    double beta = 0.5;          // Dirichlet concentration
    std::uint64_t seed = 0;
};

struct SyntheticTaskSpec {
    int num_classes = 2;
    int input_dim = 2;
    int samples_per_class = 100;
    double cluster_spread = 1.0;
    double label_noise = 0.0;  // in [0, 1)
    std::uint64_t seed = 0;
};

// Gaussian class clusters: each class mean is drawn once from 3 * N(0, I),
// samples from N(mean, spread^2 I); with probability label_noise a sample's
// label is replaced by a uniformly chosen different class. Deterministic in
// the seed.
Dataset generate_synthetic(const SyntheticTaskSpec& spec);

// Splits every sample to exactly one client.
//   Shards   : sort by label, cut into num_clients*shards_per_client equal
//              shards, deal shards_per_client to each client at random.
//   Dirichlet: per class c, draw p_c ~ Dir(beta 1_K) and assign each class-c
//              sample to client k with probability p_{c,k}; redraw (up to 100
//              times) while any client is empty.
//   ByCluster: samples of class c go to client c mod K.
std::vector<Dataset> partition(const Dataset& data, const PartitionSpec& spec);

// One row per sample: client_id,label,f0,f1,...
void write_partition_csv(const std::vector<Dataset>& clients, std::ostream& os);

}  // namespace adafed
