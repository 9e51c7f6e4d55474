// Compares the OpenMP blocked kernels against the serial reference on two
// workloads: a large gradient evaluation and a full federated round.
// Usage: adafed_bench [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "adafed/data.hpp"
#include "adafed/federation.hpp"
#include "adafed/models.hpp"
#include "adafed/reference.hpp"
#include "adafed/rng.hpp"

using namespace adafed;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename Fn>
double time_best_ms(int repeats, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const double t0 = now_ms();
        fn();
        const double t1 = now_ms();
        if (t1 - t0 < best) best = t1 - t0;
    }
    return best;
}

volatile double sink;  // keeps the optimizer honest

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (compiled without OpenMP)\n");
#endif

    // Workload 1: gradient of a logistic model over a large dataset.
    SyntheticTaskSpec task{8, 32, 12500, 1.5, 0.05, 7};
    const Dataset data = generate_synthetic(task);
    ModelSpec model{ModelKind::Logistic, 32, 8, 1, 1e-4};
    const ParamVector params = init_params(model, 3);

    const double grad_parallel = time_best_ms(repeats, [&] {
        sink = gradient(model, params, data)[0];
    });
    const double grad_serial = time_best_ms(repeats, [&] {
        sink = ref::gradient(model, params, data)[0];
    });
    std::printf("gradient   n=%d d=%d   blocked %.1f ms   reference %.1f ms   speedup %.2fx\n",
                data.size(), param_count(model), grad_parallel, grad_serial,
                grad_serial / grad_parallel);

    // Workload 2: one federated round, 64 clients, client-parallel loop.
    Experiment exp;
    exp.model = model;
    exp.clients = partition(data, {PartitionKind::Dirichlet, 64, 2, 0.5, 11});
    exp.aggregator = {AggregatorKind::AdaFed, 1.0, FedAvgWeighting::Uniform};
    exp.schedule = {ScheduleKind::Constant, 1.0};
    exp.local_epochs = 2;
    exp.local_lr = 0.05;
    exp.seed = 13;

    ParamVector theta = init_params(model, 5);
    const double round_ms = time_best_ms(repeats, [&] {
        ParamVector p = theta;
        const RoundRecord rec = run_round(exp, p, 0);
        sink = rec.direction_norm;
    });
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
#endif
    const double round_serial_ms = time_best_ms(repeats, [&] {
        ParamVector p = theta;
        const RoundRecord rec = run_round(exp, p, 0);
        sink = rec.direction_norm;
    });
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
    std::printf("round      K=64 e=2       parallel %.1f ms   1-thread %.1f ms   speedup %.2fx\n",
                round_ms, round_serial_ms, round_serial_ms / round_ms);
    return 0;
}
