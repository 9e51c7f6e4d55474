#include <cmath>

#include "adafed/models.hpp"
#include "adafed/checks.hpp"
#include "adafed/reference.hpp"
#include "adafed/rng.hpp"
#include "doctest.h"

using namespace adafed;

namespace {

Dataset random_dataset(Rng& rng, const ModelSpec& spec, int n) {
    Dataset d;
    d.feature_dim = spec.input_dim;
    std::vector<double> x(static_cast<std::size_t>(spec.input_dim));
    for (int i = 0; i < n; ++i) {
        for (double& v : x) v = rng.normal();
        const double label = is_classifier(spec.kind)
                                 ? static_cast<double>(rng.uniform_below(
                                       static_cast<std::uint64_t>(spec.output_dim)))
                                 : rng.normal();
        d.push_row(x, label);
    }
    return d;
}

ParamVector random_params(Rng& rng, const ModelSpec& spec) {
    ParamVector p(static_cast<std::size_t>(param_count(spec)));
    for (double& v : p) v = rng.uniform(-1.0, 1.0);
    return p;
}

}  // namespace

TEST_CASE("param_count and flattening") {
    CHECK(param_count({ModelKind::Linear, 2, 1, 1, 0.0}) == 3);
    CHECK(param_count({ModelKind::Logistic, 4, 3, 1, 0.0}) == 15);
    CHECK(param_count({ModelKind::Mlp2, 4, 3, 5, 0.0}) == 4 * 5 + 5 + 3 * 5 + 3);
    CHECK(param_count({ModelKind::Quadratic, 7, 1, 1, 0.0}) == 7);
}

TEST_CASE("init_params: deterministic, seed-sensitive") {
    const ModelSpec spec{ModelKind::Mlp2, 4, 3, 5, 0.0};
    const auto a = init_params(spec, 42);
    const auto b = init_params(spec, 42);
    const auto c = init_params(spec, 43);
    CHECK(a == b);
    CHECK(a != c);
    const ModelSpec lin{ModelKind::Linear, 2, 1, 1, 0.0};
    CHECK(init_params(lin, 0).size() == 3);
    const double bound = 1.0 / std::sqrt(2.0);
    for (double v : init_params(lin, 0)) CHECK(std::abs(v) <= bound);
}

TEST_CASE("loss: zero linear model on zero labels") {
    const ModelSpec spec{ModelKind::Linear, 3, 1, 1, 0.0};
    Dataset d;
    d.feature_dim = 3;
    d.push_row(std::vector<double>{1.0, 2.0, 3.0}, 0.0);
    d.push_row(std::vector<double>{-1.0, 0.5, 0.0}, 0.0);
    CHECK(loss(spec, ParamVector(4, 0.0), d) == 0.0);
}

TEST_CASE("loss: zero logistic model gives log(num_classes)") {
    const ModelSpec spec{ModelKind::Logistic, 2, 2, 1, 0.0};
    Dataset d;
    d.feature_dim = 2;
    d.push_row(std::vector<double>{0.3, -0.7}, 0.0);
    d.push_row(std::vector<double>{1.5, 0.2}, 1.0);
    CHECK(loss(spec, ParamVector(6, 0.0), d) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("loss and gradient match the independent reference implementation") {
    Rng rng(2718);
    for (ModelKind kind : {ModelKind::Linear, ModelKind::Logistic, ModelKind::Mlp2,
                           ModelKind::Quadratic}) {
        for (int trial = 0; trial < 10; ++trial) {
            ModelSpec spec;
            spec.kind = kind;
            spec.input_dim = 2 + static_cast<int>(rng.uniform_below(4));
            spec.output_dim =
                is_classifier(kind) ? 2 + static_cast<int>(rng.uniform_below(3)) : 1;
            spec.hidden_dim = 2 + static_cast<int>(rng.uniform_below(3));
            spec.l2_reg = trial % 2 ? 0.05 : 0.0;
            const Dataset d = random_dataset(rng, spec, 1 + static_cast<int>(rng.uniform_below(600)));
            const ParamVector p = random_params(rng, spec);
            CHECK(loss(spec, p, d) == doctest::Approx(ref::loss(spec, p, d)).epsilon(1e-11));
            const auto g = gradient(spec, p, d);
            const auto rg = ref::gradient(spec, p, d);
            for (std::size_t i = 0; i < g.size(); ++i)
                CHECK(g[i] == doctest::Approx(rg[i]).epsilon(1e-10));
            if (is_classifier(kind))
                CHECK(accuracy(spec, p, d) == ref::accuracy(spec, p, d));
        }
    }
}

TEST_CASE("gradient: quadratic model is exactly identity-smooth") {
    const ModelSpec spec{ModelKind::Quadratic, 5, 1, 1, 0.0};
    Rng rng(5);
    Dataset d = random_dataset(rng, spec, 4);
    const ParamVector a = random_params(rng, spec);
    ParamVector b = a;
    for (double& v : b) v += rng.uniform(-1.0, 1.0);
    const auto ga = gradient(spec, a, d);
    const auto gb = gradient(spec, b, d);
    // gradient difference equals parameter difference: L = 1 exactly
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(ga[i] - gb[i] == doctest::Approx(a[i] - b[i]).epsilon(1e-12));
}

TEST_CASE("gradient: matches central finite differences") {
    CHECK(check_gradients(10, 31337).pass);
}

TEST_CASE("gradient: single-sample dataset works") {
    const ModelSpec spec{ModelKind::Logistic, 3, 2, 1, 0.0};
    Rng rng(17);
    const Dataset d = random_dataset(rng, spec, 1);
    const ParamVector p = random_params(rng, spec);
    const auto g = gradient(spec, p, d);
    const auto fd = fd_gradient(spec, p, d);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(std::abs(g[i] - fd[i]) <= 1e-5 * (1.0 + std::abs(g[i])));
}

TEST_CASE("accuracy: separable data reaches 1.0 with a separating model") {
    // class 0 at x = -5, class 1 at x = +5; weights +/- on the first feature
    const ModelSpec spec{ModelKind::Logistic, 1, 2, 1, 0.0};
    Dataset d;
    d.feature_dim = 1;
    for (int i = 0; i < 10; ++i) {
        d.push_row(std::vector<double>{-5.0 + 0.1 * i}, 0.0);
        d.push_row(std::vector<double>{5.0 - 0.1 * i}, 1.0);
    }
    const ParamVector p{-1.0, 1.0, 0.0, 0.0};  // W = [-1; +1], b = 0
    CHECK(accuracy(spec, p, d) == 1.0);
}

TEST_CASE("accuracy: ties break toward the lowest class index") {
    const ModelSpec spec{ModelKind::Logistic, 2, 2, 1, 0.0};
    Dataset d;
    d.feature_dim = 2;
    d.push_row(std::vector<double>{1.0, 1.0}, 0.0);
    d.push_row(std::vector<double>{2.0, 0.0}, 1.0);
    d.push_row(std::vector<double>{0.0, 2.0}, 0.0);
    // zero parameters: all logits equal, argmax = class 0
    CHECK(accuracy(spec, ParamVector(6, 0.0), d) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("accuracy: rejected for regression models") {
    const ModelSpec spec{ModelKind::Linear, 2, 1, 1, 0.0};
    Dataset d;
    d.feature_dim = 2;
    d.push_row(std::vector<double>{1.0, 1.0}, 0.5);
    CHECK_THROWS_AS(accuracy(spec, ParamVector(3, 0.0), d), std::invalid_argument);
}

TEST_CASE("dimension mismatches are rejected") {
    const ModelSpec spec{ModelKind::Logistic, 3, 2, 1, 0.0};
    Dataset d;
    d.feature_dim = 2;
    d.push_row(std::vector<double>{1.0, 1.0}, 0.0);
    CHECK_THROWS_AS(loss(spec, ParamVector(8, 0.0), d), std::invalid_argument);
    CHECK_THROWS_AS(gradient(spec, ParamVector(7, 0.0), d), std::invalid_argument);
}

TEST_CASE("convexity witness: midpoint below chord for regularized models") {
    Rng rng(23);
    for (ModelKind kind : {ModelKind::Linear, ModelKind::Logistic}) {
        ModelSpec spec;
        spec.kind = kind;
        spec.input_dim = 3;
        spec.output_dim = kind == ModelKind::Linear ? 1 : 3;
        spec.l2_reg = 0.01;
        const Dataset d = random_dataset(rng, spec, 24);
        for (int trial = 0; trial < 40; ++trial) {
            const ParamVector a = random_params(rng, spec);
            const ParamVector b = random_params(rng, spec);
            ParamVector mid(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
            CHECK(loss(spec, mid, d) <=
                  0.5 * loss(spec, a, d) + 0.5 * loss(spec, b, d) + 1e-10);
        }
    }
}
