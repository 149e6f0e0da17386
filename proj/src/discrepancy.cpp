#include "todlab/discrepancy.hpp"

#include <cmath>
#include <stdexcept>

#include "todlab/kernels.hpp"

namespace todlab {

double tod(const MLPSpec& spec, const ParamVector& w_a, const ParamVector& w_b,
           std::span<const double> x, OutputSpace space) {
    check_params(spec, w_a);
    check_params(spec, w_b);
    std::vector<double> out_a = forward(spec, w_a, x);
    std::vector<double> out_b = forward(spec, w_b, x);
    to_output_space(out_a, space);
    to_output_space(out_b, space);
    double sq = 0.0;
    for (std::size_t i = 0; i < out_a.size(); ++i) {
        const double d = out_a[i] - out_b[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

std::vector<double> cod_scores(const MLPSpec& spec, const Snapshot& current,
                               const Snapshot& previous, std::span<const double> xs,
                               std::size_t n, OutputSpace space) {
    if (current.cycle != previous.cycle + 1)
        throw std::invalid_argument("cod_scores: snapshots must come from consecutive cycles (got " +
                                    std::to_string(previous.cycle) + " -> " +
                                    std::to_string(current.cycle) + ")");
    if (n == 0) return {};
    return discrepancy_norms(spec, current.params, previous.params, xs, n, space);
}

std::vector<double> emaod_scores(const MLPSpec& spec, const ParamVector& w,
                                 const ParamVector& teacher, std::span<const double> xs,
                                 std::size_t n, OutputSpace space) {
    if (n == 0) return {};
    return discrepancy_norms(spec, w, teacher, xs, n, space);
}

}  // namespace todlab
