#pragma once

#include <span>
#include <vector>

#include "todlab/mlp.hpp"

namespace todlab {

// Dataset-wide per-sample evaluation kernels. Each has a serial reference
// implementation (suffix _serial) and an OpenMP variant under the plain name;
// with no OpenMP support the plain name falls back to the reference. Every
// kernel writes sample i's result to slot i only, so both variants are
// bit-identical for any thread count (asserted in tests, timed in
// tools/bench_kernels). xs is row-major, n x spec.input_dim().

// Network outputs for every sample, row-major n x output_dim.
std::vector<double> forward_all_serial(const MLPSpec& spec, const ParamVector& params,
                                       std::span<const double> xs, std::size_t n);
std::vector<double> forward_all(const MLPSpec& spec, const ParamVector& params,
                                std::span<const double> xs, std::size_t n);

// Per-sample L2 distance between the outputs of two parameter vectors,
// in the requested output space.
std::vector<double> discrepancy_norms_serial(const MLPSpec& spec, const ParamVector& w_a,
                                             const ParamVector& w_b, std::span<const double> xs,
                                             std::size_t n, OutputSpace space);
std::vector<double> discrepancy_norms(const MLPSpec& spec, const ParamVector& w_a,
                                      const ParamVector& w_b, std::span<const double> xs,
                                      std::size_t n, OutputSpace space);

// Per-sample cross-entropy loss against the given labels.
std::vector<double> ce_losses_serial(const MLPSpec& spec, const ParamVector& params,
                                     std::span<const double> xs, std::span<const int> labels,
                                     std::size_t n);
std::vector<double> ce_losses(const MLPSpec& spec, const ParamVector& params,
                              std::span<const double> xs, std::span<const int> labels,
                              std::size_t n);

// Per-sample squared Frobenius norm of the output Jacobian w.r.t. the
// parameters (sum over outputs of ||grad_w f_k||^2).
std::vector<double> grad_sq_norms_serial(const MLPSpec& spec, const ParamVector& params,
                                         std::span<const double> xs, std::size_t n);
std::vector<double> grad_sq_norms(const MLPSpec& spec, const ParamVector& params,
                                  std::span<const double> xs, std::size_t n);

// Argmax class per sample; ties resolved to the lowest class index.
std::vector<int> predict_all(const MLPSpec& spec, const ParamVector& params,
                             std::span<const double> xs, std::size_t n);

double accuracy(const MLPSpec& spec, const ParamVector& params, std::span<const double> xs,
                std::span<const int> labels, std::size_t n);

// Accuracy per class; classes absent from labels get 0.
std::vector<double> per_class_accuracy(const MLPSpec& spec, const ParamVector& params,
                                       std::span<const double> xs, std::span<const int> labels,
                                       std::size_t n, int n_classes);

}  // namespace todlab
