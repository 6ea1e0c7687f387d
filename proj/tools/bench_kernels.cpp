#include "smart/baseline.hpp"
#include "smart/falsify.hpp"
#include "smart/synth.hpp"

#include <chrono>
#include <cstdio>
#ifdef _OPENMP
#include <omp.h>
#endif

// Times the hot kernels serial vs OpenMP and checks that both produce the
// same numbers (per-resample RNG streams make thread count irrelevant).

using namespace smart;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void bench_bootstrap() {
    BootstrapSpec spec;
    spec.n_slice = 4000;
    spec.n_other = 12000;
    spec.pooled_rate = 0.78;
    spec.observed_abs = 0.012;
    spec.resamples = 4000;
    spec.stream_seed = 42;

    auto t0 = std::chrono::steady_clock::now();
    const std::int64_t serial = bootstrap_null_exceedances_serial(spec);
    const double t_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const std::int64_t parallel = bootstrap_null_exceedances(spec);
    const double t_parallel = seconds_since(t0);

    std::printf("bootstrap_null_exceedances  n=%zu+%zu B=%d\n", spec.n_slice, spec.n_other,
                spec.resamples);
    std::printf("  serial   %8.3f s  count=%lld\n", t_serial, static_cast<long long>(serial));
    std::printf("  openmp   %8.3f s  count=%lld  speedup x%.2f\n", t_parallel,
                static_cast<long long>(parallel), t_serial / t_parallel);
    std::printf("  match: %s\n", serial == parallel ? "yes" : "NO (bug)");
}

void bench_baseline() {
    SynthConfig config;
    config.n_rows = 4000;
    config.seed = 7;
    Dataset data = gen_recidivism(config);
    const auto labels = data.labels();
    LogisticModel model = fit_logistic(data, 7, 200, 0.5);
    Predictions preds = predict(model, data);

    BaselineConfig baseline;
    baseline.max_order = 2;
    baseline.bootstrap_b = 400;
    baseline.seed = 7;
    baseline.top_k = 0;

    auto t0 = std::chrono::steady_clock::now();
    BaselineResult result = exhaustive_search(data, labels, preds, baseline);
    const double elapsed = seconds_since(t0);
    std::printf("exhaustive_search  candidates=%zu tested=%zu  %8.3f s", result.total_candidates,
                result.total_tested, elapsed);
#ifdef _OPENMP
    std::printf("  (threads=%d)", omp_get_max_threads());
#endif
    std::printf("\n");
    if (!result.results.empty())
        std::printf("  top |dAcc|=%.4f  %s\n", result.results.front().delta_acc,
                    render(result.results.front().predicate).c_str());
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp enabled, max threads %d\n\n", omp_get_max_threads());
#else
    std::printf("openmp disabled (serial build)\n\n");
#endif
    bench_bootstrap();
    std::printf("\n");
    bench_baseline();
    return 0;
}
