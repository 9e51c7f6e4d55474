#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "adafed/metrics.hpp"
#include "adafed/rng.hpp"
#include "doctest.h"

using namespace adafed;

TEST_CASE("uniform accuracies: zero spread, zero angle, zero divergence") {
    const std::vector<double> a(10, 0.8);
    const auto r = fairness_report(a, 10.0);
    CHECK(r.mean_accuracy == doctest::Approx(0.8));
    CHECK(r.std_accuracy == doctest::Approx(0.0));
    CHECK(r.angle_degrees <= 1e-5);  // acos rounding near cosine = 1
    CHECK(r.kl_to_uniform == doctest::Approx(0.0));
    CHECK(r.worst_k_pct == doctest::Approx(0.8));
    CHECK(r.best_k_pct == doctest::Approx(0.8));
}

TEST_CASE("a = (1, 0) sits at 45 degrees from the ones vector") {
    const std::vector<double> a{1.0, 0.0};
    CHECK(fairness_report(a, 50.0).angle_degrees == doctest::Approx(45.0).epsilon(1e-10));
}

TEST_CASE("two-point example") {
    const std::vector<double> a{0.5, 1.0};
    const auto r = fairness_report(a, 50.0);
    CHECK(r.worst_k_pct == doctest::Approx(0.5));
    CHECK(r.best_k_pct == doctest::Approx(1.0));
    CHECK(r.mean_accuracy == doctest::Approx(0.75));
    CHECK(r.std_accuracy == doctest::Approx(0.25));
}

TEST_CASE("worst/best group size uses the ceiling") {
    std::vector<double> a(31);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 + 0.01 * static_cast<double>(i);
    const auto r = fairness_report(a, 10.0);  // ceil(3.1) = 4 clients
    CHECK(r.worst_k_pct == doctest::Approx((0.50 + 0.51 + 0.52 + 0.53) / 4.0));
    CHECK(r.best_k_pct == doctest::Approx((0.80 + 0.79 + 0.78 + 0.77) / 4.0));
}

TEST_CASE("errors: empty input, bad k_pct, all-zero vector") {
    CHECK_THROWS_AS(fairness_report(std::vector<double>{}, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(fairness_report(std::vector<double>{0.5}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fairness_report(std::vector<double>{0.5}, 60.0), std::invalid_argument);
    CHECK_THROWS_AS(fairness_report(std::vector<double>(4, 0.0), 10.0), std::invalid_argument);
}

TEST_CASE("a zero entry among positive ones is fine (0 log 0 = 0)") {
    const std::vector<double> a{1.0, 0.0};
    const auto r = fairness_report(a, 50.0);
    CHECK(r.kl_to_uniform == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("property: permutation invariance of every field") {
    Rng rng(808);
    for (int trial = 0; trial < 30; ++trial) {
        const int k = 2 + static_cast<int>(rng.uniform_below(20));
        std::vector<double> a(static_cast<std::size_t>(k));
        for (double& v : a) v = rng.uniform(0.01, 1.0);
        const auto base = fairness_report(a, 25.0);
        rng.shuffle(a);
        const auto shuffled = fairness_report(a, 25.0);
        CHECK(base.mean_accuracy == doctest::Approx(shuffled.mean_accuracy).epsilon(1e-12));
        CHECK(base.std_accuracy == doctest::Approx(shuffled.std_accuracy).epsilon(1e-12));
        CHECK(base.worst_k_pct == doctest::Approx(shuffled.worst_k_pct).epsilon(1e-12));
        CHECK(base.best_k_pct == doctest::Approx(shuffled.best_k_pct).epsilon(1e-12));
        CHECK(base.angle_degrees == doctest::Approx(shuffled.angle_degrees).epsilon(1e-12));
        CHECK(base.kl_to_uniform == doctest::Approx(shuffled.kl_to_uniform).epsilon(1e-12));
    }
}

TEST_CASE("property: the three uniformity measures vanish together") {
    Rng rng(909);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng.uniform_below(12));
        std::vector<double> a(static_cast<std::size_t>(k));
        const bool make_uniform = trial % 2 == 0;
        const double level = rng.uniform(0.05, 1.0);
        for (double& v : a) v = make_uniform ? level : rng.uniform(0.01, 1.0);
        const auto r = fairness_report(a, 10.0);
        const bool sigma_zero = r.std_accuracy <= 1e-12;
        const bool angle_zero = r.angle_degrees <= 1e-5;
        const bool kl_zero = r.kl_to_uniform <= 1e-10;
        CHECK(sigma_zero == angle_zero);
        CHECK(angle_zero == kl_zero);
        CHECK(r.worst_k_pct <= r.mean_accuracy + 1e-12);
        CHECK(r.mean_accuracy <= r.best_k_pct + 1e-12);
        CHECK(r.angle_degrees >= 0.0);
        CHECK(r.angle_degrees <= 90.0);
        CHECK(r.kl_to_uniform >= 0.0);
    }
}

TEST_CASE("property: scaling accuracies leaves angle and KL unchanged") {
    Rng rng(1010);
    for (int trial = 0; trial < 30; ++trial) {
        const int k = 2 + static_cast<int>(rng.uniform_below(12));
        std::vector<double> a(static_cast<std::size_t>(k));
        for (double& v : a) v = rng.uniform(0.05, 1.0);
        const double c = rng.uniform(0.05, 1.0);
        std::vector<double> scaled = a;
        for (double& v : scaled) v *= c;
        const auto base = fairness_report(a, 20.0);
        const auto sc = fairness_report(scaled, 20.0);
        CHECK(sc.angle_degrees == doctest::Approx(base.angle_degrees).epsilon(1e-9));
        CHECK(sc.kl_to_uniform == doctest::Approx(base.kl_to_uniform).epsilon(1e-9));
        CHECK(sc.mean_accuracy == doctest::Approx(c * base.mean_accuracy).epsilon(1e-12));
        CHECK(sc.std_accuracy == doctest::Approx(c * base.std_accuracy).epsilon(1e-10));
        CHECK(sc.worst_k_pct == doctest::Approx(c * base.worst_k_pct).epsilon(1e-12));
        CHECK(sc.best_k_pct == doctest::Approx(c * base.best_k_pct).epsilon(1e-12));
    }
}

TEST_CASE("csv row round-trips") {
    const std::vector<double> a{0.31, 0.77, 0.92, 0.55};
    const auto r = fairness_report(a, 25.0);
    const std::string row = fairness_csv_row(r);
    double v[6];
    REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3],
                        &v[4], &v[5]) == 6);
    CHECK(v[0] == r.mean_accuracy);
    CHECK(v[1] == r.std_accuracy);
    CHECK(v[5] == r.kl_to_uniform);
}
