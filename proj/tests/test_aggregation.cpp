#include <algorithm>
#include <cmath>
#include <limits>

#include "adafed/aggregation.hpp"
#include "adafed/checks.hpp"
#include "adafed/rng.hpp"
#include "doctest.h"

using namespace adafed;

namespace {

ClientUpdate make_update(int id, ParamVector g, double f) {
    ClientUpdate u;
    u.client_id = id;
    u.gradient = std::move(g);
    u.loss = f;
    return u;
}

}  // namespace

TEST_CASE("orthogonalize: single client is a pure loss scale") {
    const auto res = orthogonalize({make_update(0, {2.0, 0.0}, 2.0)}, 1.0);
    REQUIRE(res.orthogonal.size() == 1);
    CHECK(res.orthogonal[0][0] == doctest::Approx(1.0));
    CHECK(res.orthogonal[0][1] == doctest::Approx(0.0));
    CHECK(res.dropped_clients.empty());
}

TEST_CASE("orthogonalize: two clients, hand-worked values") {
    const auto res = orthogonalize(
        {make_update(0, {2.0, 0.0}, 2.0), make_update(1, {1.0, 1.0}, 3.0)}, 1.0);
    REQUIRE(res.orthogonal.size() == 2);
    CHECK(res.orthogonal[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.orthogonal[0][1] == doctest::Approx(0.0));
    // residual (0,1), denominator 3 - 1 = 2
    CHECK(res.orthogonal[1][0] == doctest::Approx(0.0));
    CHECK(res.orthogonal[1][1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("orthogonalize: zero denominator drops the client") {
    const auto res = orthogonalize(
        {make_update(0, {2.0, 0.0}, 2.0), make_update(1, {1.0, 1.0}, 1.0)}, 1.0);
    REQUIRE(res.orthogonal.size() == 1);
    REQUIRE(res.dropped_clients == std::vector<int>{1});
}

TEST_CASE("orthogonalize: error paths") {
    CHECK_THROWS_AS(orthogonalize({}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(
        orthogonalize({make_update(0, {1.0, 0.0}, 1.0), make_update(1, {1.0}, 1.0)}, 1.0),
        std::invalid_argument);
    CHECK_THROWS_AS(orthogonalize({make_update(0, {0.0, 0.0}, 1.0)}, 1.0),
                    AllClientsDroppedError);
    CHECK_THROWS_AS(
        orthogonalize({make_update(0, {1.0, 0.0, 0.0},
                                   std::numeric_limits<double>::quiet_NaN())},
                      1.0),
        std::invalid_argument);
}

TEST_CASE("solve_lambda: worked examples") {
    SUBCASE("equal norms split evenly") {
        const auto sol = solve_lambda({{1.0, 0.0}, {0.0, 1.0}});
        CHECK(sol.lambda[0] == doctest::Approx(0.5));
        CHECK(sol.lambda[1] == doctest::Approx(0.5));
        CHECK(sol.alpha == doctest::Approx(1.0));
    }
    SUBCASE("smaller norm takes more weight") {
        const auto sol = solve_lambda({{1.0, 0.0}, {0.0, 0.5}});
        CHECK(sol.lambda[0] == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(sol.lambda[1] == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(sol.alpha == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("singleton") {
        const auto sol = solve_lambda({{3.0, 4.0}});
        CHECK(sol.lambda[0] == doctest::Approx(1.0));
        CHECK(sol.alpha == doctest::Approx(50.0));  // 2 * 25
    }
    SUBCASE("zero-norm input rejected") {
        CHECK_THROWS_AS(solve_lambda({{0.0, 0.0}}), std::invalid_argument);
    }
}

TEST_CASE("solve_lambda: rescaling one vector follows the closed form") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.uniform_below(5));
        std::vector<ParamVector> vecs(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            vecs[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(k), 0.0);
            vecs[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = rng.uniform(0.2, 3.0);
        }
        const double c = rng.uniform(0.1, 5.0);
        const std::size_t which = rng.uniform_below(static_cast<std::uint64_t>(k));

        auto scaled_vecs = vecs;
        scale_inplace(scaled_vecs[which], c);
        const auto scaled = solve_lambda(scaled_vecs);

        // lambda_k = 1 / (n_k * sum_j 1/n_j) evaluated on the scaled norms
        std::vector<double> sq(static_cast<std::size_t>(k));
        double inv_sum = 0.0;
        for (int i = 0; i < k; ++i) {
            sq[static_cast<std::size_t>(i)] = squared_norm(scaled_vecs[static_cast<std::size_t>(i)]);
            inv_sum += 1.0 / sq[static_cast<std::size_t>(i)];
        }
        double total = 0.0;
        for (int i = 0; i < k; ++i) {
            CHECK(scaled.lambda[static_cast<std::size_t>(i)] ==
                  doctest::Approx(1.0 / (sq[static_cast<std::size_t>(i)] * inv_sum)).epsilon(1e-12));
            total += scaled.lambda[static_cast<std::size_t>(i)];
        }
        CHECK(std::abs(total - 1.0) <= 1e-10);
    }
}

TEST_CASE("adafed_direction: hand-worked two-client example") {
    AggregatorSpec spec{AggregatorKind::AdaFed, 1.0, FedAvgWeighting::Uniform};
    const auto res = adafed_direction(
        {make_update(0, {2.0, 0.0}, 2.0), make_update(1, {1.0, 1.0}, 3.0)}, spec);
    CHECK(res.direction[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(res.direction[1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(res.alpha == doctest::Approx(0.4).epsilon(1e-12));
    const double d1 = 2.0 * res.direction[0];
    const double d2 = res.direction[0] + res.direction[1];
    CHECK(d1 == doctest::Approx(0.5 * res.alpha * 2.0).epsilon(1e-12));
    CHECK(d2 == doctest::Approx(0.5 * res.alpha * 3.0).epsilon(1e-12));
}

TEST_CASE("adafed_direction: direction equals the weighted sum exactly as computed") {
    Rng rng(7);
    const AggregationInstance inst = random_aggregation_instance(rng);
    AggregatorSpec spec{AggregatorKind::AdaFed, inst.gamma, FedAvgWeighting::Uniform};
    const auto res = adafed_direction(inst.updates, spec);
    ParamVector recomputed(res.direction.size(), 0.0);
    for (std::size_t i = 0; i < res.orthogonal_gradients.size(); ++i)
        axpy(res.lambda[i], res.orthogonal_gradients[i], recomputed);
    CHECK(recomputed == res.direction);  // bit-identical recombination
}

TEST_CASE("adafed_direction: gamma zero equalizes directional derivatives") {
    Rng rng(13);
    AggregatorSpec spec{AggregatorKind::AdaFed, 0.0, FedAvgWeighting::Uniform};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ClientUpdate> updates;
        const int k = 2 + static_cast<int>(rng.uniform_below(6));
        for (int i = 0; i < k; ++i) {
            ParamVector g(static_cast<std::size_t>(k + 8));
            for (double& v : g) v = rng.normal();
            updates.push_back(make_update(i, std::move(g), rng.uniform(0.1, 10.0)));
        }
        const auto res = adafed_direction(updates, spec);
        REQUIRE(res.retained_clients.size() == static_cast<std::size_t>(k));
        const double first = dot(updates[0].gradient, res.direction);
        for (const auto& u : updates) {
            const double deriv = dot(u.gradient, res.direction);
            CHECK(deriv > 0.0);
            CHECK(std::abs(deriv - first) <= 1e-8 * std::abs(first));
        }
    }
}

TEST_CASE("adafed_direction: single client reduces to the scaled gradient ray") {
    AggregatorSpec spec{AggregatorKind::AdaFed, 1.0, FedAvgWeighting::Uniform};
    const auto res = adafed_direction({make_update(0, {3.0, 4.0}, 1.0)}, spec);
    CHECK(res.direction[0] * 4.0 == doctest::Approx(res.direction[1] * 3.0));
    CHECK(dot(ParamVector{3.0, 4.0}, res.direction) > 0.0);
}

TEST_CASE("adafed_direction: negative denominator is kept and flagged") {
    AggregatorSpec spec{AggregatorKind::AdaFed, 1.0, FedAvgWeighting::Uniform};
    // client 2's projection coefficient (3) exceeds |f|^gamma = 1
    const auto res = adafed_direction(
        {make_update(1, {2.0, 0.0}, 2.0), make_update(2, {3.0, 1.0}, 1.0)}, spec);
    REQUIRE(res.retained_clients == std::vector<int>{1, 2});
    REQUIRE(res.negative_denominator_clients == std::vector<int>{2});
    // identity survives the sign flip
    CHECK(dot(ParamVector{3.0, 1.0}, res.direction) ==
          doctest::Approx(0.5 * res.alpha * 1.0).epsilon(1e-10));
    CHECK(dot(ParamVector{2.0, 0.0}, res.direction) ==
          doctest::Approx(0.5 * res.alpha * 2.0).epsilon(1e-10));
}

TEST_CASE("adafed_direction: processes in ascending client id regardless of input order") {
    AggregatorSpec spec{AggregatorKind::AdaFed, 1.0, FedAvgWeighting::Uniform};
    const auto a = adafed_direction(
        {make_update(5, {1.0, 1.0}, 3.0), make_update(2, {2.0, 0.0}, 2.0)}, spec);
    const auto b = adafed_direction(
        {make_update(2, {2.0, 0.0}, 2.0), make_update(5, {1.0, 1.0}, 3.0)}, spec);
    CHECK(a.direction == b.direction);
    CHECK(a.lambda == b.lambda);
    CHECK(a.retained_clients == std::vector<int>{2, 5});
}

TEST_CASE("fedavg_direction: worked examples") {
    SUBCASE("uniform") {
        const auto res = fedavg_direction(
            {make_update(0, {1.0, 0.0}, 1.0), make_update(1, {0.0, 1.0}, 1.0)},
            FedAvgWeighting::Uniform);
        CHECK(res.direction[0] == doctest::Approx(0.5));
        CHECK(res.direction[1] == doctest::Approx(0.5));
    }
    SUBCASE("by sample count") {
        auto u0 = make_update(0, {1.0, 0.0}, 1.0);
        auto u1 = make_update(1, {0.0, 1.0}, 1.0);
        u0.num_samples = 3;
        u1.num_samples = 1;
        const auto res = fedavg_direction({u0, u1}, FedAvgWeighting::BySampleCount);
        CHECK(res.direction[0] == doctest::Approx(0.75));
        CHECK(res.direction[1] == doctest::Approx(0.25));
    }
    SUBCASE("single client returns its own gradient") {
        const auto res = fedavg_direction({make_update(0, {2.5, -1.0}, 1.0)},
                                          FedAvgWeighting::Uniform);
        CHECK(res.direction == ParamVector{2.5, -1.0});
    }
    SUBCASE("empty input rejected") {
        CHECK_THROWS_AS(fedavg_direction({}, FedAvgWeighting::Uniform), std::invalid_argument);
    }
}

TEST_CASE("min_norm_in_hull: worked examples") {
    SUBCASE("symmetric orthogonal pair") {
        const auto res = min_norm_in_hull({{1.0, 0.0}, {0.0, 1.0}});
        CHECK(res.converged);
        CHECK(res.lambda[0] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(res.combination[0] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(squared_norm(res.combination) == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("collinear vectors pick the shorter endpoint") {
        const auto res = min_norm_in_hull({{1.0, 0.0}, {2.0, 0.0}});
        CHECK(res.converged);
        CHECK(res.lambda[0] == doctest::Approx(1.0));
        CHECK(res.lambda[1] == doctest::Approx(0.0));
        CHECK(res.combination[0] == doctest::Approx(1.0));
    }
    SUBCASE("simplex validity on random inputs") {
        Rng rng(31);
        for (int trial = 0; trial < 30; ++trial) {
            const int k = 1 + static_cast<int>(rng.uniform_below(6));
            std::vector<ParamVector> grads(static_cast<std::size_t>(k));
            for (auto& g : grads) {
                g.resize(8);
                for (double& v : g) v = rng.normal();
            }
            const auto res = min_norm_in_hull(grads);
            double total = 0.0;
            for (double l : res.lambda) {
                CHECK(l >= 0.0);
                total += l;
            }
            CHECK(std::abs(total - 1.0) <= 1e-10);
        }
    }
}

TEST_CASE("step_size_bound: worked examples") {
    CHECK(step_size_bound({2.0, 3.0}, 1.0, 1.0) == doctest::Approx(4.0));
    CHECK(step_size_bound({5.0, 0.7}, 0.0, 2.0) == doctest::Approx(1.0));
    CHECK(step_size_bound({0.25}, 2.0, 0.5) == doctest::Approx(0.25));
    CHECK_THROWS_AS(step_size_bound({1.0}, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("property: orthogonality, span, identity, simplex over random instances") {
    // Smaller trial counts here; the acceptance suite runs the full batches.
    CHECK(check_orthogonality(50, 12345).pass);
    CHECK(check_span(50, 12345).pass);
    const auto identity = check_identity(50, 12345);
    CHECK(identity.pass);
    CHECK(identity.worst <= 1e-8);
    Rng rng(555);
    for (int trial = 0; trial < 25; ++trial) {
        const AggregationInstance inst = random_aggregation_instance(rng);
        AggregatorSpec spec{AggregatorKind::AdaFed, inst.gamma, FedAvgWeighting::Uniform};
        const auto res = adafed_direction(inst.updates, spec);
        double total = 0.0;
        for (double l : res.lambda) {
            CHECK(l > 0.0);
            total += l;
        }
        CHECK(std::abs(total - 1.0) <= 1e-10);
        CHECK(res.alpha > 0.0);
    }
}

TEST_CASE("property: closed form matches the iterative oracle on orthogonal inputs") {
    CHECK(check_oracle(40, 777).pass);
    CHECK(check_grid_oracle(6, 777).pass);
}

TEST_CASE("aggregation is deterministic: identical inputs give identical outputs") {
    Rng rng(4242);
    const AggregationInstance inst = random_aggregation_instance(rng);
    AggregatorSpec spec{AggregatorKind::AdaFed, inst.gamma, FedAvgWeighting::Uniform};
    const auto a = adafed_direction(inst.updates, spec);
    const auto b = adafed_direction(inst.updates, spec);
    CHECK(a.direction == b.direction);
    CHECK(a.lambda == b.lambda);
    CHECK(a.alpha == b.alpha);
}
