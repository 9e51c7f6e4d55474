#include "adafed/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

#include "adafed/dataset.hpp"
#include "adafed/federation.hpp"
#include "adafed/models.hpp"

namespace adafed {
namespace {

std::string fmt_detail(const char* fmt, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

double floored_pow(double loss, double gamma) {
    return std::pow(std::max(std::abs(loss), kLossFloor), gamma);
}

const ClientUpdate& find_update(const std::vector<ClientUpdate>& updates, int cid) {
    for (const auto& u : updates)
        if (u.client_id == cid) return u;
    throw std::logic_error("client id not found");
}

// K orthogonal vectors with squared norms in [0.5, 2], built by a test-side
// Gram-Schmidt that is independent of the production sweep.
std::vector<ParamVector> random_orthogonal_set(Rng& rng, int k, int dim) {
    std::vector<ParamVector> out;
    while (static_cast<int>(out.size()) < k) {
        ParamVector v(static_cast<std::size_t>(dim));
        for (double& x : v) x = rng.normal();
        for (const auto& b : out) axpy(-dot(v, b) / squared_norm(b), b, v);
        const double n = norm(v);
        if (n < 1e-6) continue;
        const double target = std::sqrt(rng.uniform(0.5, 2.0));
        scale_inplace(v, target / n);
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

AggregationInstance random_aggregation_instance(Rng& rng) {
    static constexpr double kGammas[] = {0.0, 0.1, 1.0, 5.0};
    AggregationInstance inst;
    inst.gamma = kGammas[rng.uniform_below(4)];
    const int k = 2 + static_cast<int>(rng.uniform_below(15));          // [2, 16]
    const int d = k + static_cast<int>(rng.uniform_below(
                          static_cast<std::uint64_t>(257 - k)));        // [K, 256]
    const double lo = inst.gamma > 1.0 ? 0.5 : 0.1;
    const double hi = inst.gamma > 1.0 ? 2.0 : 10.0;
    inst.updates.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        ClientUpdate& u = inst.updates[static_cast<std::size_t>(i)];
        u.client_id = i;
        u.loss = rng.uniform(lo, hi);
        u.num_samples = 1 + static_cast<long>(rng.uniform_below(100));
        u.gradient.resize(static_cast<std::size_t>(d));
        for (double& g : u.gradient) g = rng.normal();
    }
    return inst;
}

CheckResult check_orthogonality(int trials, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x01));
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const AggregationInstance inst = random_aggregation_instance(rng);
        const OrthogonalizeResult orth = orthogonalize(inst.updates, inst.gamma);
        for (std::size_t i = 0; i < orth.orthogonal.size(); ++i)
            for (std::size_t j = i + 1; j < orth.orthogonal.size(); ++j) {
                const double defect =
                    std::abs(dot(orth.orthogonal[i], orth.orthogonal[j])) /
                    (norm(orth.orthogonal[i]) * norm(orth.orthogonal[j]));
                worst = std::max(worst, defect);
            }
    }
    return {"orthogonality", worst <= 1e-8,
            worst, fmt_detail("max |g~_i.g~_j| / (|g~_i||g~_j|) = %.3e", worst)};
}

CheckResult check_identity(int trials, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x02));
    double worst = 0.0;
    bool positive = true;
    bool monotone = true;
    for (int t = 0; t < trials; ++t) {
        const AggregationInstance inst = random_aggregation_instance(rng);
        AggregatorSpec spec;
        spec.kind = AggregatorKind::AdaFed;
        spec.gamma = inst.gamma;
        const AggregationResult res = adafed_direction(inst.updates, spec);

        std::vector<double> derivs(res.retained_clients.size());
        std::vector<double> scaled(res.retained_clients.size());
        for (std::size_t i = 0; i < res.retained_clients.size(); ++i) {
            const ClientUpdate& u = find_update(inst.updates, res.retained_clients[i]);
            const double lhs = dot(u.gradient, res.direction);
            const double rhs = 0.5 * res.alpha * floored_pow(u.loss, inst.gamma);
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
            positive = positive && lhs > 0.0;
            derivs[i] = lhs;
            scaled[i] = floored_pow(u.loss, inst.gamma);
        }
        // Larger loss^gamma must mean a larger directional derivative; pairs
        // closer than the identity tolerance allows are skipped.
        for (std::size_t i = 0; i < derivs.size(); ++i)
            for (std::size_t j = 0; j < derivs.size(); ++j)
                if (scaled[i] > scaled[j] * (1.0 + 1e-6))
                    monotone = monotone && derivs[i] > derivs[j];
    }
    const bool pass = worst <= 1e-8 && positive && monotone;
    return {"directional_derivative_identity", pass, worst,
            fmt_detail("max rel |g.d - (a/2)|f|^y| = %.3e", worst) +
                (positive ? "" : "; NON-POSITIVE DERIVATIVE") +
                (monotone ? "" : "; ORDERING VIOLATION")};
}

CheckResult check_span(int trials, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x03));
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const AggregationInstance inst = random_aggregation_instance(rng);
        const OrthogonalizeResult orth = orthogonalize(inst.updates, inst.gamma);
        for (std::size_t j = 0; j < orth.orthogonal.size(); ++j) {
            const ClientUpdate& u =
                inst.updates[static_cast<std::size_t>(orth.retained_positions[j])];
            ParamVector resid = u.gradient;
            for (std::size_t i = 0; i <= j; ++i)
                axpy(-dot(resid, orth.orthogonal[i]) / squared_norm(orth.orthogonal[i]),
                     orth.orthogonal[i], resid);
            worst = std::max(worst, norm(resid) / norm(u.gradient));
        }
    }
    return {"span_preservation", worst <= 1e-8, worst,
            fmt_detail("max residual of g_k against span(g~_1..g~_k) = %.3e", worst)};
}

CheckResult check_oracle(int trials, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x04));
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const int k = 1 + static_cast<int>(rng.uniform_below(8));
        const int d = k + static_cast<int>(rng.uniform_below(32));
        const auto ortho = random_orthogonal_set(rng, k, d);
        const LambdaSolution closed = solve_lambda(ortho);
        const MinNormResult iter = min_norm_in_hull(ortho, 100000, 1e-14);
        for (int i = 0; i < k; ++i)
            worst = std::max(worst, std::abs(closed.lambda[static_cast<std::size_t>(i)] -
                                             iter.lambda[static_cast<std::size_t>(i)]));
        ParamVector closed_dir(static_cast<std::size_t>(d), 0.0);
        for (int i = 0; i < k; ++i)
            axpy(closed.lambda[static_cast<std::size_t>(i)], ortho[static_cast<std::size_t>(i)],
                 closed_dir);
        worst = std::max(worst,
                         std::abs(squared_norm(closed_dir) - squared_norm(iter.combination)));
    }
    return {"min_norm_oracle", worst <= 1e-6, worst,
            fmt_detail("max |closed-form - iterative| (lambda, |g|^2) = %.3e", worst)};
}

CheckResult check_grid_oracle(int trials, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x05));
    double worst_lambda = 0.0;
    bool never_worse = true;
    for (int t = 0; t < trials; ++t) {
        const int k = 2 + static_cast<int>(rng.uniform_below(2));  // K = 2 or 3
        const auto ortho = random_orthogonal_set(rng, k, k + 4);
        std::vector<double> sq(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) sq[static_cast<std::size_t>(i)] = squared_norm(ortho[static_cast<std::size_t>(i)]);

        const double step = 1e-3;
        const int steps = 1000;
        std::vector<double> best_lambda;
        double best = std::numeric_limits<double>::infinity();
        auto consider = [&](double l1, double l2, double l3) {
            const double value = l1 * l1 * sq[0] + l2 * l2 * sq[1] +
                                 (k == 3 ? l3 * l3 * sq[2] : 0.0);
            if (value < best) {
                best = value;
                best_lambda = k == 3 ? std::vector<double>{l1, l2, l3}
                                     : std::vector<double>{l1, l2};
            }
        };
        if (k == 2) {
            for (int a = 0; a <= steps; ++a) consider(a * step, 1.0 - a * step, 0.0);
        } else {
            for (int a = 0; a <= steps; ++a)
                for (int b = 0; b <= steps - a; ++b)
                    consider(a * step, b * step, 1.0 - a * step - b * step);
        }

        const LambdaSolution closed = solve_lambda(ortho);
        double closed_value = 0.0;
        for (int i = 0; i < k; ++i)
            closed_value += closed.lambda[static_cast<std::size_t>(i)] *
                            closed.lambda[static_cast<std::size_t>(i)] * sq[static_cast<std::size_t>(i)];
        never_worse = never_worse && closed_value <= best + 1e-12;
        for (int i = 0; i < k; ++i)
            worst_lambda = std::max(worst_lambda,
                                    std::abs(closed.lambda[static_cast<std::size_t>(i)] -
                                             best_lambda[static_cast<std::size_t>(i)]));
    }
    const bool pass = never_worse && worst_lambda <= 2e-3;
    return {"simplex_grid_oracle", pass, worst_lambda,
            fmt_detail("max |lambda - grid argmin| = %.3e", worst_lambda) +
                (never_worse ? "" : "; CLOSED FORM WORSE THAN A GRID POINT")};
}

CheckResult check_descent(int rounds, std::uint64_t seed) {
    // K quadratic objectives with exact smoothness 1; the per-round step size
    // comes from the bound schedule, so every client's loss must be
    // non-increasing in every round up to 1e-12.
    Rng rng(derive_seed(seed, 0x06));
    const int k = 8, dim = 16;
    Experiment exp;
    exp.model = {ModelKind::Quadratic, dim, 1, 1, 0.0};
    exp.clients.resize(static_cast<std::size_t>(k));
    std::vector<double> center(static_cast<std::size_t>(dim));
    for (auto& client : exp.clients) {
        client.feature_dim = dim;
        for (double& v : center) v = 2.0 * rng.normal();
        client.push_row(center, 0.0);
    }
    exp.aggregator = {AggregatorKind::AdaFed, 1.0, FedAvgWeighting::Uniform};
    exp.schedule = {ScheduleKind::DescentBound, 1.0};
    exp.local_epochs = 1;
    // Small local rate keeps the iterate off the centers' affine hull for the
    // whole horizon; on it the K gradients are linearly dependent and clients
    // start being dropped, after which the bound says nothing about them.
    exp.local_lr = 0.02;
    exp.participation_fraction = 1.0;
    exp.seed = derive_seed(seed, 0x60);

    ParamVector params = init_params(exp.model, exp.seed);
    std::map<int, double> before;
    for (int c = 0; c < k; ++c)
        before[c] = loss(exp.model, params, exp.clients[static_cast<std::size_t>(c)]);

    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < rounds; ++t) {
        const RoundRecord rec = run_round(exp, params, t);
        for (const auto& [cid, after] : rec.per_client_loss)
            worst = std::max(worst, after - before[cid]);
        before = rec.per_client_loss;
    }
    return {"descent_guarantee", worst <= 1e-12, worst,
            fmt_detail("max per-round loss increase = %.3e over %g rounds", worst,
                       static_cast<double>(rounds))};
}

CheckResult check_gradients(int per_kind, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x07));
    static constexpr ModelKind kKinds[] = {ModelKind::Linear, ModelKind::Logistic,
                                           ModelKind::Mlp2, ModelKind::Quadratic};
    static constexpr double kRegs[] = {0.0, 0.01, 0.5};
    double worst = 0.0;
    for (ModelKind kind : kKinds) {
        for (int t = 0; t < per_kind; ++t) {
            ModelSpec spec;
            spec.kind = kind;
            spec.input_dim = 2 + static_cast<int>(rng.uniform_below(5));
            spec.output_dim = kind == ModelKind::Linear || kind == ModelKind::Quadratic
                                  ? 1
                                  : 2 + static_cast<int>(rng.uniform_below(3));
            spec.hidden_dim = 2 + static_cast<int>(rng.uniform_below(4));
            spec.l2_reg = kRegs[rng.uniform_below(3)];

            const int n = 1 + static_cast<int>(rng.uniform_below(8));
            Dataset data;
            data.feature_dim = spec.input_dim;
            std::vector<double> x(static_cast<std::size_t>(spec.input_dim));
            for (int i = 0; i < n; ++i) {
                for (double& v : x) v = rng.normal();
                const double label = is_classifier(kind)
                                         ? static_cast<double>(rng.uniform_below(
                                               static_cast<std::uint64_t>(spec.output_dim)))
                                         : rng.normal();
                data.push_row(x, label);
            }
            ParamVector params(static_cast<std::size_t>(param_count(spec)));
            for (double& v : params) v = rng.uniform(-1.0, 1.0);

            const ParamVector g = gradient(spec, params, data);
            const ParamVector fd = fd_gradient(spec, params, data);
            for (std::size_t i = 0; i < g.size(); ++i)
                worst = std::max(worst, std::abs(g[i] - fd[i]) / (1.0 + std::abs(g[i])));
        }
    }
    return {"finite_difference_gradients", worst <= 1e-5, worst,
            fmt_detail("max |analytic - central difference| / (1+|g|) = %.3e", worst)};
}

CheckResult check_drift(int runs, std::uint64_t seed) {
    // After e epochs of local GD the pseudo-gradient can drift from the
    // single-step one by at most lr * e * l, with l the largest gradient norm
    // seen along the local trajectory.
    Rng rng(derive_seed(seed, 0x08));
    double worst_margin = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < runs; ++t) {
        ModelSpec spec;
        const bool quad = rng.uniform() < 0.5;
        spec.kind = quad ? ModelKind::Quadratic : ModelKind::Logistic;
        spec.input_dim = 2 + static_cast<int>(rng.uniform_below(5));
        spec.output_dim = quad ? 1 : 2 + static_cast<int>(rng.uniform_below(3));
        spec.l2_reg = 0.0;

        const int n = 2 + static_cast<int>(rng.uniform_below(16));
        Dataset data;
        data.feature_dim = spec.input_dim;
        std::vector<double> x(static_cast<std::size_t>(spec.input_dim));
        for (int i = 0; i < n; ++i) {
            for (double& v : x) v = rng.normal();
            data.push_row(x, quad ? 0.0
                                  : static_cast<double>(rng.uniform_below(
                                        static_cast<std::uint64_t>(spec.output_dim))));
        }
        ParamVector theta0(static_cast<std::size_t>(param_count(spec)));
        for (double& v : theta0) v = rng.uniform(-1.0, 1.0);

        const int epochs = 1 + static_cast<int>(rng.uniform_below(8));
        const double lr = rng.uniform(0.01, 0.3);
        const LocalTrainResult tr = local_train(spec, theta0, data, epochs, lr,
                                                LocalOptimizer::GD, 1, derive_seed(seed, t));

        // Independent replay of the trajectory to measure the gradient bound.
        ParamVector theta = theta0;
        ParamVector accum(theta0.size(), 0.0);
        double l = 0.0;
        for (int e = 0; e < epochs; ++e) {
            const ParamVector g = gradient(spec, theta, data);
            l = std::max(l, norm(g));
            axpy(lr, g, accum);
            for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = theta0[i] - accum[i];
        }
        ParamVector one_step = gradient(spec, theta0, data);
        scale_inplace(one_step, lr);

        ParamVector drift = tr.pseudo_gradient;
        axpy(-1.0, one_step, drift);
        const double margin = norm(drift) - lr * epochs * l;
        worst_margin = std::max(worst_margin, margin);
    }
    return {"pseudo_gradient_drift", worst_margin <= 1e-12, worst_margin,
            fmt_detail("max (|drift| - lr*e*l) = %.3e", worst_margin)};
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
    return {
        check_orthogonality(200, seed), check_identity(200, seed),
        check_span(200, seed),          check_oracle(100, seed),
        check_grid_oracle(20, seed),    check_descent(200, seed),
        check_gradients(100, seed),     check_drift(100, seed),
    };
}

}  // namespace adafed
