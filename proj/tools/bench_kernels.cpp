// Times the OpenMP per-sample kernels against their serial references and
// checks that both produce bit-identical results.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "todlab/kernels.hpp"
#include "todlab/rng.hpp"

using namespace todlab;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto start = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto stop = Clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 20000;
    int reps = 5;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::strcmp(argv[i], "--n") == 0) n = std::stoull(argv[i + 1]);
        else if (std::strcmp(argv[i], "--reps") == 0) reps = std::stoi(argv[i + 1]);
        else {
            std::fprintf(stderr, "usage: bench_kernels [--n N] [--reps R]\n");
            return 1;
        }
    }

    const MLPSpec spec{{8, 64, 64, 5}};
    Rng rng(42);
    const ParamVector w_a = init_params(spec, rng);
    const ParamVector w_b = init_params(spec, rng);
    std::vector<double> xs(n * 8);
    for (double& v : xs) v = rng.normal();
    std::vector<int> labels(n);
    for (int& v : labels) v = static_cast<int>(rng.uniform_index(5));

    struct Row {
        const char* name;
        std::function<void()> serial, parallel;
        bool equal;
    };
    std::vector<Row> rows;
    rows.push_back({"forward_all",
                    [&] { forward_all_serial(spec, w_a, xs, n); },
                    [&] { forward_all(spec, w_a, xs, n); },
                    forward_all_serial(spec, w_a, xs, n) == forward_all(spec, w_a, xs, n)});
    rows.push_back({"discrepancy_norms",
                    [&] { discrepancy_norms_serial(spec, w_a, w_b, xs, n, OutputSpace::probs); },
                    [&] { discrepancy_norms(spec, w_a, w_b, xs, n, OutputSpace::probs); },
                    discrepancy_norms_serial(spec, w_a, w_b, xs, n, OutputSpace::probs) ==
                        discrepancy_norms(spec, w_a, w_b, xs, n, OutputSpace::probs)});
    rows.push_back({"ce_losses",
                    [&] { ce_losses_serial(spec, w_a, xs, labels, n); },
                    [&] { ce_losses(spec, w_a, xs, labels, n); },
                    ce_losses_serial(spec, w_a, xs, labels, n) ==
                        ce_losses(spec, w_a, xs, labels, n)});
    rows.push_back({"grad_sq_norms",
                    [&] { grad_sq_norms_serial(spec, w_a, xs, n); },
                    [&] { grad_sq_norms(spec, w_a, xs, n); },
                    grad_sq_norms_serial(spec, w_a, xs, n) == grad_sq_norms(spec, w_a, xs, n)});

    std::printf("n = %zu samples, model [8-64-64-5], %d reps\n", n, reps);
    std::printf("%-18s %12s %12s %9s %s\n", "kernel", "serial (ms)", "openmp (ms)", "speedup",
                "identical");
    bool all_equal = true;
    for (Row& row : rows) {
        const double ts = time_ms(row.serial, reps);
        const double tp = time_ms(row.parallel, reps);
        std::printf("%-18s %12.2f %12.2f %8.2fx %s\n", row.name, ts, tp, ts / tp,
                    row.equal ? "yes" : "NO");
        all_equal = all_equal && row.equal;
    }
    return all_equal ? 0 : 1;
}
