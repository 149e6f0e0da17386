#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "todlab/mlp.hpp"

namespace todlab {

// SGD with momentum + coupled weight decay, plus a single multiplicative
// learning-rate drop at a fixed fraction of the epoch budget.
struct TrainConfig {
    double lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    int batch_size = 128;
    int epochs = 200;
    double lr_drop_factor = 0.1;   // multiplier applied once
    double lr_drop_at_frac = 0.8;  // ... when epoch >= frac * epochs

    void validate() const;  // throws std::invalid_argument on bad ranges
};

struct OptimState {
    ParamVector params;
    ParamVector momentum_buffer;  // same shape as params, starts at zero
    std::int64_t step_count = 0;
    int epoch = 0;  // maintained by train(); drives the lr schedule
};

OptimState make_optim_state(ParamVector params);

// Learning rate in effect for the given epoch.
double effective_lr(const TrainConfig& cfg, int epoch);

// v <- momentum*v + (grad + weight_decay*w);  w <- w - lr_eff*v.
OptimState& sgd_step(OptimState& state, const ParamVector& grad, const TrainConfig& cfg);

// One gradient-descent step on the single-sample euclidean loss 1/2 (y-f)^2:
// returns w - eta * (f - y) * grad_w f. No momentum, no weight decay.
// Requires a scalar-output model.
ParamVector plain_gd_step(const MLPSpec& spec, const ParamVector& params,
                          std::span<const double> x, double y, double eta);

struct TrainCallbacks {
    // Adds an already-weighted auxiliary gradient term (used for the
    // consistency loss); invoked inside each gradient evaluation.
    AuxGradFn aux;
    // Invoked after every optimizer step (EMA teacher updates, snapshots).
    std::function<void(const OptimState&)> after_step;
};

struct TrainResult {
    OptimState state;
    std::vector<double> epoch_loss;  // mean supervised loss per epoch
};

// Runs epochs x ceil(N/batch) sgd_steps over mini-batches. The shuffle order
// for epoch e is a pure function of (run_seed, e), so reruns are bit-identical
// and independent of anything else that draws randomness.
TrainResult train(const MLPSpec& spec, OptimState state, const Batch& data,
                  const TrainConfig& cfg, std::uint64_t run_seed, LossKind kind,
                  const TrainCallbacks& callbacks = {});

}  // namespace todlab
