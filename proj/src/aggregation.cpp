#include "adafed/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace adafed {
namespace {

void validate_updates(const std::vector<ClientUpdate>& updates) {
    if (updates.empty()) throw std::invalid_argument("aggregation: no client updates");
    const std::size_t dim = updates.front().gradient.size();
    if (dim == 0) throw std::invalid_argument("aggregation: zero-dimensional gradient");
    for (const auto& u : updates) {
        if (u.gradient.size() != dim)
            throw std::invalid_argument("aggregation: gradient dimension mismatch for client " +
                                        std::to_string(u.client_id));
        if (!all_finite(u.gradient))
            throw std::invalid_argument("aggregation: non-finite gradient for client " +
                                        std::to_string(u.client_id));
        if (!std::isfinite(u.loss) || u.loss < 0.0)
            throw std::invalid_argument("aggregation: loss must be finite and non-negative");
    }
}

double floored_loss_pow(double loss, double gamma, double eps_loss) {
    return std::pow(std::max(std::abs(loss), eps_loss), gamma);
}

}  // namespace

OrthogonalizeResult orthogonalize(const std::vector<ClientUpdate>& updates, double gamma,
                                  double eps_loss, double eps_dep) {
    validate_updates(updates);
    if (gamma < 0.0) throw std::invalid_argument("orthogonalize: gamma must be non-negative");

    OrthogonalizeResult out;
    std::vector<double> inv_sqnorm;  // 1/||g~_i||^2 for retained vectors

    for (std::size_t pos = 0; pos < updates.size(); ++pos) {
        const ClientUpdate& u = updates[pos];
        const double g_norm = norm(u.gradient);
        if (g_norm == 0.0) {
            out.dropped_clients.push_back(u.client_id);
            continue;
        }

        // Residual of g_k against the retained basis. One re-orthogonalization
        // pass keeps the basis orthogonal to machine precision; the projection
        // coefficients from both passes are folded into the denominator so the
        // decomposition g_k = s * g~_k + sum_i c_i g~_i stays exact.
        ParamVector residual = u.gradient;
        double coeff_sum = 0.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i < out.orthogonal.size(); ++i) {
                const ParamVector& basis = out.orthogonal[i];
                const double c = dot(residual, basis) * inv_sqnorm[i];
                axpy(-c, basis, residual);
                coeff_sum += c;
            }
        }

        const double denom = floored_loss_pow(u.loss, gamma, eps_loss) - coeff_sum;
        const double res_norm = norm(residual);
        if (res_norm < eps_dep * g_norm || std::abs(denom) < eps_dep) {
            out.dropped_clients.push_back(u.client_id);
            continue;
        }
        if (denom < 0.0) out.negative_denominator_clients.push_back(u.client_id);

        scale_inplace(residual, 1.0 / denom);
        inv_sqnorm.push_back(1.0 / squared_norm(residual));
        out.orthogonal.push_back(std::move(residual));
        out.retained_positions.push_back(static_cast<int>(pos));
    }

    if (out.orthogonal.empty())
        throw AllClientsDroppedError("orthogonalize: every client was degenerate this round");
    return out;
}

LambdaSolution solve_lambda(const std::vector<ParamVector>& orthogonal_gradients) {
    if (orthogonal_gradients.empty()) throw std::invalid_argument("solve_lambda: empty input");
    const std::size_t k = orthogonal_gradients.size();
    std::vector<double> sq(k);
    double inv_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sq[i] = squared_norm(orthogonal_gradients[i]);
        if (sq[i] == 0.0) throw std::invalid_argument("solve_lambda: zero-norm input vector");
        inv_sum += 1.0 / sq[i];
    }
    LambdaSolution sol;
    sol.alpha = 2.0 / inv_sum;
    sol.lambda.resize(k);
    for (std::size_t i = 0; i < k; ++i) sol.lambda[i] = 1.0 / (sq[i] * inv_sum);
    return sol;
}

AggregationResult adafed_direction(const std::vector<ClientUpdate>& updates,
                                   const AggregatorSpec& spec) {
    validate_updates(updates);
    // Processing order is part of the determinism contract: ascending client id.
    std::vector<ClientUpdate> ordered = updates;
    std::sort(ordered.begin(), ordered.end(),
              [](const ClientUpdate& a, const ClientUpdate& b) { return a.client_id < b.client_id; });

    OrthogonalizeResult orth = orthogonalize(ordered, spec.gamma);
    LambdaSolution sol = solve_lambda(orth.orthogonal);

    AggregationResult res;
    res.direction.assign(ordered.front().gradient.size(), 0.0);
    for (std::size_t i = 0; i < orth.orthogonal.size(); ++i) {
        axpy(sol.lambda[i], orth.orthogonal[i], res.direction);
        res.retained_clients.push_back(
            ordered[static_cast<std::size_t>(orth.retained_positions[i])].client_id);
    }
    res.orthogonal_gradients = std::move(orth.orthogonal);
    res.lambda = std::move(sol.lambda);
    res.alpha = sol.alpha;
    res.dropped_clients = std::move(orth.dropped_clients);
    res.negative_denominator_clients = std::move(orth.negative_denominator_clients);
    return res;
}

AggregationResult fedavg_direction(const std::vector<ClientUpdate>& updates,
                                   FedAvgWeighting weighting) {
    validate_updates(updates);
    const std::size_t k = updates.size();
    std::vector<double> w(k, 1.0);
    if (weighting == FedAvgWeighting::BySampleCount) {
        for (std::size_t i = 0; i < k; ++i) {
            if (updates[i].num_samples <= 0)
                throw std::invalid_argument("fedavg: num_samples must be positive");
            w[i] = static_cast<double>(updates[i].num_samples);
        }
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= total;

    AggregationResult res;
    res.direction.assign(updates.front().gradient.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        axpy(w[i], updates[i].gradient, res.direction);
        res.retained_clients.push_back(updates[i].client_id);
    }
    res.lambda = std::move(w);
    return res;
}

MinNormResult min_norm_in_hull(const std::vector<ParamVector>& gradients, int max_iters,
                               double tol) {
    if (gradients.empty()) throw std::invalid_argument("min_norm_in_hull: empty input");
    const std::size_t k = gradients.size();
    MinNormResult res;

    // Gram matrix; the iteration never touches the full vectors again.
    std::vector<double> gram(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j)
            gram[i * k + j] = gram[j * k + i] = dot(gradients[i], gradients[j]);

    std::vector<double> lambda(k, 1.0 / static_cast<double>(k));
    std::vector<double> gl(k);  // (G lambda)_i
    auto refresh_gl = [&] {
        for (std::size_t i = 0; i < k; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += gram[i * k + j] * lambda[j];
            gl[i] = acc;
        }
    };
    refresh_gl();

    int it = 0;
    for (; it < max_iters; ++it) {
        // Frank-Wolfe vertex (steepest) and away vertex (worst active).
        std::size_t toward = 0, away = 0;
        double away_val = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < k; ++i) {
            if (gl[i] < gl[toward]) toward = i;
            if (lambda[i] > 0.0 && gl[i] > away_val) {
                away_val = gl[i];
                away = i;
            }
        }
        const double value = std::inner_product(lambda.begin(), lambda.end(), gl.begin(), 0.0);
        res.gap = 2.0 * (value - gl[toward]);
        if (res.gap <= tol) {
            res.converged = true;
            break;
        }
        // Move mass from `away` to `toward` with exact line search.
        const double curvature = gram[toward * k + toward] - 2.0 * gram[toward * k + away] +
                                 gram[away * k + away];
        double step = lambda[away];
        if (curvature > 0.0) step = std::min(step, (gl[away] - gl[toward]) / curvature);
        if (step <= 0.0) {
            res.converged = true;  // no feasible progress left
            break;
        }
        lambda[toward] += step;
        lambda[away] -= step;
        if (lambda[away] < 0.0) lambda[away] = 0.0;
        refresh_gl();
    }
    res.iterations = it;

    res.lambda = std::move(lambda);
    res.combination.assign(gradients.front().size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) axpy(res.lambda[i], gradients[i], res.combination);
    return res;
}

double step_size_bound(const std::vector<double>& losses, double gamma, double smoothness) {
    if (smoothness <= 0.0) throw std::invalid_argument("step_size_bound: L must be positive");
    if (losses.empty()) throw std::invalid_argument("step_size_bound: empty losses");
    double lo = std::numeric_limits<double>::infinity();
    for (double f : losses) lo = std::min(lo, std::pow(std::abs(f), gamma));
    return 2.0 / smoothness * lo;
}

}  // namespace adafed
