#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "todlab/mlp.hpp"

namespace todlab {

// Model weights captured at a known point of an optimization run.
// Snapshots are ordered by global optimizer step.
struct Snapshot {
    ParamVector params;
    int cycle = 0;
    int epoch = 0;
    std::int64_t step = 0;
};

// Temporal output discrepancy: L2 distance between the two models' outputs
// on x, in the requested output space. Symmetric; zero iff outputs coincide.
double tod(const MLPSpec& spec, const ParamVector& w_a, const ParamVector& w_b,
           std::span<const double> x, OutputSpace space);

// Per-sample discrepancy between the end-of-cycle model and the previous
// cycle's model (cycle 1 uses the random-init snapshot, tagged cycle 0).
// Requires current.cycle == previous.cycle + 1. Empty xs -> empty result.
std::vector<double> cod_scores(const MLPSpec& spec, const Snapshot& current,
                               const Snapshot& previous, std::span<const double> xs,
                               std::size_t n, OutputSpace space);

// Per-sample discrepancy against an EMA-teacher parameter vector.
std::vector<double> emaod_scores(const MLPSpec& spec, const ParamVector& w,
                                 const ParamVector& teacher, std::span<const double> xs,
                                 std::size_t n, OutputSpace space);

}  // namespace todlab
