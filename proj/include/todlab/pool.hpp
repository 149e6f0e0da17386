#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "todlab/mlp.hpp"

namespace todlab {

// Partition of the training indices into labeled and unlabeled sets.
// Both lists are kept sorted ascending.
struct PoolState {
    std::vector<std::size_t> labeled;
    std::vector<std::size_t> unlabeled;
    int cycle = 0;

    // Throws std::logic_error if the two sets are not a disjoint sorted
    // partition of 0..n_train-1.
    void validate(std::size_t n_train) const;
};

// Uniformly random labeled subset of size floor(n_train * start_frac);
// rejects empty labeled or empty unlabeled results.
PoolState init_pool(std::size_t n_train, double start_frac, std::uint64_t seed);

// Moves the given (sorted ascending, currently unlabeled) indices into the
// labeled set and advances the cycle counter.
void annotate(PoolState& pool, const std::vector<std::size_t>& chosen);

// Indices of the b largest scores; ties broken by ascending sample index;
// result sorted ascending. scores[i] belongs to sample indices[i].
std::vector<std::size_t> select_top_b(std::span<const double> scores,
                                      std::span<const std::size_t> indices, std::size_t b);

// Each label is independently replaced, with probability p, by a uniform
// draw over the other n_classes-1 classes.
std::vector<int> inject_label_noise(std::span<const int> labels, double p, int n_classes,
                                    std::uint64_t seed);

// alpha * teacher + (1 - alpha) * w, elementwise.
ParamVector ema_update(const ParamVector& teacher, const ParamVector& w, double alpha);

struct UnsupLossGrad {
    double loss = 0.0;
    ParamVector grad;
};

// Consistency loss against a fixed teacher: mean over the batch of the
// squared L2 distance between student and teacher outputs (in the given
// output space), with the exact gradient w.r.t. the student only.
UnsupLossGrad unsup_loss_and_grad(const MLPSpec& spec, const ParamVector& w,
                                  const ParamVector& teacher, std::span<const double> xs,
                                  std::size_t n, OutputSpace space);

}  // namespace todlab
