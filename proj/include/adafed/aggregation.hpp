#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "adafed/vec.hpp"

namespace adafed {

// One client's contribution to a round: a gradient (or pseudo-gradient), the
// scalar loss it was measured at, and bookkeeping.
struct ClientUpdate {
    int client_id = 0;
    ParamVector gradient;
    double loss = 0.0;
    long num_samples = 1;
};

enum class AggregatorKind { AdaFed, FedAvg, MgdaMinNorm };
enum class FedAvgWeighting { Uniform, BySampleCount };

struct AggregatorSpec {
    AggregatorKind kind = AggregatorKind::AdaFed;
    double gamma = 1.0;  // AdaFed loss exponent; gamma = 0 gives loss-blind weights
    FedAvgWeighting fedavg_weights = FedAvgWeighting::Uniform;
};

// |f_k| is floored at this value before exponentiation so a converged client
// cannot blow up its scaled gradient.
inline constexpr double kLossFloor = 1e-12;

// A client is dropped from a round when its orthogonalization residual falls
// below kDegeneracyTol * ||g_k|| or its scaling denominator magnitude falls
// below kDegeneracyTol.
inline constexpr double kDegeneracyTol = 1e-9;

struct OrthogonalizeResult {
    // Orthogonalized, loss-scaled gradients of the retained clients, in input
    // order. Pairwise orthogonal.
    std::vector<ParamVector> orthogonal;
    // Positions (indices into the input list) of retained clients.
    std::vector<int> retained_positions;
    std::vector<int> dropped_clients;               // client ids, in input order
    std::vector<int> negative_denominator_clients;  // retained but sign-flipped
};

struct LambdaSolution {
    std::vector<double> lambda;  // simplex weights, one per input vector
    double alpha = 0.0;          // 2 / sum_k 1/||g~_k||^2
};

struct AggregationResult {
    std::vector<ParamVector> orthogonal_gradients;
    std::vector<double> lambda;
    double alpha = 0.0;
    ParamVector direction;
    std::vector<int> dropped_clients;
    std::vector<int> retained_clients;              // ids, processing order
    std::vector<int> negative_denominator_clients;
};

struct MinNormResult {
    std::vector<double> lambda;
    ParamVector combination;  // sum_k lambda_k g_k
    double gap = 0.0;         // Frank-Wolfe duality gap at exit
    int iterations = 0;
    bool converged = false;
};

struct AllClientsDroppedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Loss-scaled Gram-Schmidt sweep. Clients are processed in input order;
// callers that need the id-ordering contract sort beforehand. Degenerate
// clients (residual or denominator below tolerance) are dropped and reported,
// not silently skipped.
OrthogonalizeResult orthogonalize(const std::vector<ClientUpdate>& updates, double gamma,
                                  double eps_loss = kLossFloor, double eps_dep = kDegeneracyTol);

// Closed-form minimum-norm weights over pairwise-orthogonal inputs:
// lambda_k = 1 / (||g~_k||^2 * sum_j 1/||g~_j||^2), alpha = 2 / sum_j 1/||g~_j||^2.
LambdaSolution solve_lambda(const std::vector<ParamVector>& orthogonal_gradients);

// Full AdaFed direction: sort by client id, orthogonalize, weight, combine.
// For every retained client, g_k . direction == (alpha/2) * |f_k|^gamma.
AggregationResult adafed_direction(const std::vector<ClientUpdate>& updates,
                                   const AggregatorSpec& spec);

// Fixed-weight average of raw gradients (uniform or sample-count weights).
AggregationResult fedavg_direction(const std::vector<ClientUpdate>& updates,
                                   FedAvgWeighting weighting);

// Minimum-norm element of the convex hull of `gradients`, via pairwise
// Frank-Wolfe with exact line search from the uniform start. Serves as the
// MGDA baseline direction and as the oracle that cross-checks solve_lambda.
// Non-convergence is flagged, never thrown; the achieved gap is returned.
MinNormResult min_norm_in_hull(const std::vector<ParamVector>& gradients, int max_iters = 10000,
                               double tol = 1e-12);

// Largest global step size guaranteed non-increasing for L-smooth objectives:
// (2/L) * min_k |f_k|^gamma.
double step_size_bound(const std::vector<double>& losses, double gamma, double smoothness);

}  // namespace adafed
