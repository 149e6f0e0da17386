#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "todlab/rng.hpp"

namespace todlab {

using ParamVector = std::vector<double>;

// Fully connected ReLU network. Hidden layers use ReLU, the last layer is a
// raw affine map. Parameters are stored flat, layer-major: for each layer,
// the (out x in) weight matrix row-major, then the out biases.
struct MLPSpec {
    std::vector<int> layer_sizes;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }

    std::size_t param_count() const;
    // Offset of layer l's weight block in the flat vector.
    std::size_t layer_offset(int l) const;

    // Throws std::invalid_argument unless there are >= 2 layer sizes, all >= 1.
    void validate() const;

    bool operator==(const MLPSpec&) const = default;
};

// Glorot-uniform weights, zero biases.
ParamVector init_params(const MLPSpec& spec, Rng& rng);

// Per-layer activations kept around for the backward pass. Reusable across
// calls to avoid reallocation in hot loops.
struct ForwardWorkspace {
    std::vector<std::vector<double>> act;  // act[0] = input, act[L] = output
};

// Forward pass; returns a reference to the output activations inside ws.
const std::vector<double>& forward_into(const MLPSpec& spec, const ParamVector& params,
                                        std::span<const double> x, ForwardWorkspace& ws);

std::vector<double> forward(const MLPSpec& spec, const ParamVector& params,
                            std::span<const double> x);

// Accumulates the gradient of (output . seed) w.r.t. params into grad
// (grad += contribution). ws must hold the forward pass for x.
// ReLU subgradient at exactly zero pre-activation is zero.
void backward_into(const MLPSpec& spec, const ParamVector& params, const ForwardWorkspace& ws,
                   std::span<const double> output_seed, ParamVector& grad);

// Numerically stabilized; entries positive, sum 1.
std::vector<double> softmax(std::span<const double> logits);

// Output representation used by discrepancy scores: raw logits or
// post-softmax class probabilities.
enum class OutputSpace { logits, probs };

// In-place conversion of a raw network output to the requested space.
void to_output_space(std::vector<double>& out, OutputSpace space);

// 1/2 (y - f)^2 for scalar-output models.
double loss_euclidean(double output, double target);

// -log softmax(logits)[label], evaluated in log space.
double loss_ce(std::span<const double> logits, int label);

enum class LossKind { euclidean, ce, combined };

struct Batch {
    std::span<const double> features;  // row-major n x input_dim
    std::span<const int> labels;       // class ids (ce) — empty for euclidean
    std::span<const double> targets;   // real targets (euclidean) — empty for ce
    std::size_t size = 0;
};

// Hook for LossKind::combined: adds the caller's auxiliary gradient term
// (already weighted) into grad.
using AuxGradFn = std::function<void(const ParamVector& params, ParamVector& grad)>;

struct LossGrad {
    double loss = 0.0;   // mean loss over the batch (supervised term only)
    ParamVector grad;    // mean gradient, plus the aux term for combined
};

// Exact mean reverse-mode gradient over the batch. Per-sample gradients are
// evaluated independently and reduced in sample order, so the result does not
// depend on thread count (see kernels.hpp for the parallel path).
LossGrad grad_loss(const MLPSpec& spec, const ParamVector& params, const Batch& batch,
                   LossKind kind, const AuxGradFn& aux = nullptr);

// Gradient of the raw output f_index w.r.t. params.
ParamVector grad_output(const MLPSpec& spec, const ParamVector& params,
                        std::span<const double> x, int output_index);

// Sum over output indices of ||grad_w f_k||^2 (squared Frobenius norm of the
// output Jacobian w.r.t. w). For scalar outputs this is ||grad_w f||^2.
double output_grad_sq_norm(const MLPSpec& spec, const ParamVector& params,
                           std::span<const double> x);

void check_params(const MLPSpec& spec, const ParamVector& params);

}  // namespace todlab
