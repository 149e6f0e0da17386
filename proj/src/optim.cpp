#include "todlab/optim.hpp"

#include <numeric>
#include <stdexcept>

#include "todlab/rng.hpp"

namespace todlab {

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (momentum < 0.0 || momentum >= 1.0)
        throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
    if (weight_decay < 0.0) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (!(lr_drop_factor > 0.0) || lr_drop_factor > 1.0)
        throw std::invalid_argument("TrainConfig: lr_drop_factor must be in (0,1]");
    if (!(lr_drop_at_frac > 0.0) || lr_drop_at_frac > 1.0)
        throw std::invalid_argument("TrainConfig: lr_drop_at_frac must be in (0,1]");
}

OptimState make_optim_state(ParamVector params) {
    OptimState st;
    st.momentum_buffer.assign(params.size(), 0.0);
    st.params = std::move(params);
    return st;
}

double effective_lr(const TrainConfig& cfg, int epoch) {
    const bool dropped = static_cast<double>(epoch) >= cfg.lr_drop_at_frac * cfg.epochs;
    return dropped ? cfg.lr * cfg.lr_drop_factor : cfg.lr;
}

OptimState& sgd_step(OptimState& state, const ParamVector& grad, const TrainConfig& cfg) {
    if (grad.size() != state.params.size() || state.momentum_buffer.size() != state.params.size())
        throw std::invalid_argument("sgd_step: shape mismatch");
    const double lr = effective_lr(cfg, state.epoch);
    for (std::size_t i = 0; i < state.params.size(); ++i) {
        const double g = grad[i] + cfg.weight_decay * state.params[i];
        state.momentum_buffer[i] = cfg.momentum * state.momentum_buffer[i] + g;
        state.params[i] -= lr * state.momentum_buffer[i];
    }
    ++state.step_count;
    return state;
}

ParamVector plain_gd_step(const MLPSpec& spec, const ParamVector& params,
                          std::span<const double> x, double y, double eta) {
    check_params(spec, params);
    if (spec.output_dim() != 1)
        throw std::invalid_argument("plain_gd_step: requires a scalar-output model");
    ForwardWorkspace ws;
    const double f = forward_into(spec, params, x, ws)[0];
    ParamVector grad(params.size(), 0.0);
    const double seed[1] = {f - y};  // d/df of 1/2 (y-f)^2
    backward_into(spec, params, ws, seed, grad);
    ParamVector next(params);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= eta * grad[i];
    return next;
}

TrainResult train(const MLPSpec& spec, OptimState state, const Batch& data,
                  const TrainConfig& cfg, std::uint64_t run_seed, LossKind kind,
                  const TrainCallbacks& callbacks) {
    cfg.validate();
    check_params(spec, state.params);
    if (data.size == 0) throw std::invalid_argument("train: empty labeled set");
    const std::size_t n = data.size;
    const int d = spec.input_dim();

    std::vector<std::size_t> order(n);
    std::vector<double> feat;
    std::vector<int> labels;
    std::vector<double> targets;
    TrainResult res;
    res.epoch_loss.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        state.epoch = epoch;
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(mix_seed(run_seed, rng_tag("shuffle"), static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
            const std::size_t end = std::min(n, begin + cfg.batch_size);
            const std::size_t bs = end - begin;
            feat.resize(bs * d);
            if (!data.labels.empty()) labels.resize(bs);
            if (!data.targets.empty()) targets.resize(bs);
            for (std::size_t k = 0; k < bs; ++k) {
                const std::size_t src = order[begin + k];
                std::copy_n(data.features.data() + src * d, d, feat.data() + k * d);
                if (!data.labels.empty()) labels[k] = data.labels[src];
                if (!data.targets.empty()) targets[k] = data.targets[src];
            }
            Batch chunk;
            chunk.features = feat;
            chunk.labels = labels;
            chunk.targets = targets;
            chunk.size = bs;
            const LossGrad lg = grad_loss(spec, state.params, chunk, kind, callbacks.aux);
            loss_sum += lg.loss * static_cast<double>(bs);
            sgd_step(state, lg.grad, cfg);
            if (callbacks.after_step) callbacks.after_step(state);
        }
        res.epoch_loss.push_back(loss_sum / static_cast<double>(n));
    }
    res.state = std::move(state);
    return res;
}

}  // namespace todlab
