#include "todlab/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace todlab {

// Shared validation for all kernels.
static void check_inputs(const MLPSpec& spec, const ParamVector& params,
                         std::span<const double> xs, std::size_t n) {
    check_params(spec, params);
    if (xs.size() != n * static_cast<std::size_t>(spec.input_dim()))
        throw std::invalid_argument("kernel: sample span size does not match n x input_dim");
}

std::vector<double> forward_all_serial(const MLPSpec& spec, const ParamVector& params,
                                       std::span<const double> xs, std::size_t n) {
    check_inputs(spec, params, xs, n);
    const int d = spec.input_dim();
    const int k = spec.output_dim();
    std::vector<double> out(n * k);
    ForwardWorkspace ws;
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double>& y = forward_into(spec, params, xs.subspan(i * d, d), ws);
        std::copy(y.begin(), y.end(), out.begin() + i * k);
    }
    return out;
}

std::vector<double> forward_all(const MLPSpec& spec, const ParamVector& params,
                                std::span<const double> xs, std::size_t n) {
#ifdef _OPENMP
    check_inputs(spec, params, xs, n);
    const int d = spec.input_dim();
    const int k = spec.output_dim();
    std::vector<double> out(n * k);
#pragma omp parallel
    {
        ForwardWorkspace ws;
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            const std::vector<double>& y = forward_into(spec, params, xs.subspan(i * d, d), ws);
            std::copy(y.begin(), y.end(), out.begin() + i * k);
        }
    }
    return out;
#else
    return forward_all_serial(spec, params, xs, n);
#endif
}

namespace {

double sample_discrepancy(const MLPSpec& spec, const ParamVector& w_a, const ParamVector& w_b,
                          std::span<const double> x, OutputSpace space, ForwardWorkspace& ws) {
    std::vector<double> out_a = forward_into(spec, w_a, x, ws);
    std::vector<double> out_b = forward_into(spec, w_b, x, ws);
    to_output_space(out_a, space);
    to_output_space(out_b, space);
    double sq = 0.0;
    for (std::size_t j = 0; j < out_a.size(); ++j) {
        const double d = out_a[j] - out_b[j];
        sq += d * d;
    }
    return std::sqrt(sq);
}

}  // namespace

std::vector<double> discrepancy_norms_serial(const MLPSpec& spec, const ParamVector& w_a,
                                             const ParamVector& w_b, std::span<const double> xs,
                                             std::size_t n, OutputSpace space) {
    check_inputs(spec, w_a, xs, n);
    check_params(spec, w_b);
    const int d = spec.input_dim();
    std::vector<double> res(n);
    ForwardWorkspace ws;
    for (std::size_t i = 0; i < n; ++i)
        res[i] = sample_discrepancy(spec, w_a, w_b, xs.subspan(i * d, d), space, ws);
    return res;
}

std::vector<double> discrepancy_norms(const MLPSpec& spec, const ParamVector& w_a,
                                      const ParamVector& w_b, std::span<const double> xs,
                                      std::size_t n, OutputSpace space) {
#ifdef _OPENMP
    check_inputs(spec, w_a, xs, n);
    check_params(spec, w_b);
    const int d = spec.input_dim();
    std::vector<double> res(n);
#pragma omp parallel
    {
        ForwardWorkspace ws;
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
            res[i] = sample_discrepancy(spec, w_a, w_b, xs.subspan(i * d, d), space, ws);
    }
    return res;
#else
    return discrepancy_norms_serial(spec, w_a, w_b, xs, n, space);
#endif
}

static void check_labels(std::span<const int> labels, std::size_t n) {
    if (labels.size() != n)
        throw std::invalid_argument("kernel: label span size does not match n");
}

std::vector<double> ce_losses_serial(const MLPSpec& spec, const ParamVector& params,
                                     std::span<const double> xs, std::span<const int> labels,
                                     std::size_t n) {
    check_inputs(spec, params, xs, n);
    check_labels(labels, n);
    const int d = spec.input_dim();
    std::vector<double> res(n);
    ForwardWorkspace ws;
    for (std::size_t i = 0; i < n; ++i)
        res[i] = loss_ce(forward_into(spec, params, xs.subspan(i * d, d), ws), labels[i]);
    return res;
}

std::vector<double> ce_losses(const MLPSpec& spec, const ParamVector& params,
                              std::span<const double> xs, std::span<const int> labels,
                              std::size_t n) {
#ifdef _OPENMP
    check_inputs(spec, params, xs, n);
    check_labels(labels, n);
    const int d = spec.input_dim();
    std::vector<double> res(n);
#pragma omp parallel
    {
        ForwardWorkspace ws;
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
            res[i] = loss_ce(forward_into(spec, params, xs.subspan(i * d, d), ws), labels[i]);
    }
    return res;
#else
    return ce_losses_serial(spec, params, xs, labels, n);
#endif
}

std::vector<double> grad_sq_norms_serial(const MLPSpec& spec, const ParamVector& params,
                                         std::span<const double> xs, std::size_t n) {
    check_inputs(spec, params, xs, n);
    const int d = spec.input_dim();
    std::vector<double> res(n);
    for (std::size_t i = 0; i < n; ++i)
        res[i] = output_grad_sq_norm(spec, params, xs.subspan(i * d, d));
    return res;
}

std::vector<double> grad_sq_norms(const MLPSpec& spec, const ParamVector& params,
                                  std::span<const double> xs, std::size_t n) {
#ifdef _OPENMP
    check_inputs(spec, params, xs, n);
    const int d = spec.input_dim();
    std::vector<double> res(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        res[i] = output_grad_sq_norm(spec, params, xs.subspan(i * d, d));
    return res;
#else
    return grad_sq_norms_serial(spec, params, xs, n);
#endif
}

std::vector<int> predict_all(const MLPSpec& spec, const ParamVector& params,
                             std::span<const double> xs, std::size_t n) {
    const std::vector<double> out = forward_all(spec, params, xs, n);
    const int k = spec.output_dim();
    std::vector<int> pred(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = out.data() + i * k;
        int best = 0;
        for (int j = 1; j < k; ++j)
            if (row[j] > row[best]) best = j;
        pred[i] = best;
    }
    return pred;
}

double accuracy(const MLPSpec& spec, const ParamVector& params, std::span<const double> xs,
                std::span<const int> labels, std::size_t n) {
    check_labels(labels, n);
    if (n == 0) throw std::invalid_argument("accuracy: empty sample set");
    const std::vector<int> pred = predict_all(spec, params, xs, n);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (pred[i] == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(n);
}

std::vector<double> per_class_accuracy(const MLPSpec& spec, const ParamVector& params,
                                       std::span<const double> xs, std::span<const int> labels,
                                       std::size_t n, int n_classes) {
    check_labels(labels, n);
    if (n_classes < 1) throw std::invalid_argument("per_class_accuracy: n_classes must be >= 1");
    const std::vector<int> pred = predict_all(spec, params, xs, n);
    std::vector<std::size_t> total(n_classes, 0), correct(n_classes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw std::invalid_argument("per_class_accuracy: label out of range");
        ++total[labels[i]];
        if (pred[i] == labels[i]) ++correct[labels[i]];
    }
    std::vector<double> acc(n_classes, 0.0);
    for (int c = 0; c < n_classes; ++c)
        if (total[c] > 0) acc[c] = static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    return acc;
}

}  // namespace todlab
