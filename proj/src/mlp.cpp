#include "todlab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace todlab {

void MLPSpec::validate() const {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("MLPSpec: need at least input and output layer sizes");
    for (int s : layer_sizes)
        if (s < 1)
            throw std::invalid_argument("MLPSpec: layer sizes must be >= 1, got " +
                                        std::to_string(s));
}

std::size_t MLPSpec::param_count() const {
    std::size_t n = 0;
    for (int l = 0; l < num_layers(); ++l)
        n += static_cast<std::size_t>(layer_sizes[l]) * layer_sizes[l + 1] + layer_sizes[l + 1];
    return n;
}

std::size_t MLPSpec::layer_offset(int l) const {
    std::size_t off = 0;
    for (int k = 0; k < l; ++k)
        off += static_cast<std::size_t>(layer_sizes[k]) * layer_sizes[k + 1] + layer_sizes[k + 1];
    return off;
}

ParamVector init_params(const MLPSpec& spec, Rng& rng) {
    spec.validate();
    ParamVector p(spec.param_count());
    std::size_t off = 0;
    for (int l = 0; l < spec.num_layers(); ++l) {
        const int in = spec.layer_sizes[l];
        const int out = spec.layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / (in + out));
        for (int i = 0; i < out * in; ++i) p[off + i] = rng.uniform(-limit, limit);
        off += static_cast<std::size_t>(out) * in;
        for (int i = 0; i < out; ++i) p[off + i] = 0.0;  // biases
        off += out;
    }
    return p;
}

void check_params(const MLPSpec& spec, const ParamVector& params) {
    spec.validate();
    if (params.size() != spec.param_count())
        throw std::invalid_argument("params size " + std::to_string(params.size()) +
                                    " does not match spec param count " +
                                    std::to_string(spec.param_count()));
}

const std::vector<double>& forward_into(const MLPSpec& spec, const ParamVector& params,
                                        std::span<const double> x, ForwardWorkspace& ws) {
    if (static_cast<int>(x.size()) != spec.input_dim())
        throw std::invalid_argument("forward: input size " + std::to_string(x.size()) +
                                    " != input_dim " + std::to_string(spec.input_dim()));
    const int L = spec.num_layers();
    ws.act.resize(L + 1);
    ws.act[0].assign(x.begin(), x.end());
    std::size_t off = 0;
    for (int l = 0; l < L; ++l) {
        const int in = spec.layer_sizes[l];
        const int out = spec.layer_sizes[l + 1];
        const double* W = params.data() + off;
        const double* b = W + static_cast<std::size_t>(out) * in;
        const std::vector<double>& a = ws.act[l];
        std::vector<double>& z = ws.act[l + 1];
        z.resize(out);
        for (int i = 0; i < out; ++i) {
            double s = b[i];
            const double* row = W + static_cast<std::size_t>(i) * in;
            for (int j = 0; j < in; ++j) s += row[j] * a[j];
            // Hidden layers are ReLU; the final layer stays affine.
            z[i] = (l + 1 < L && s < 0.0) ? 0.0 : s;
        }
        off += static_cast<std::size_t>(out) * in + out;
    }
    return ws.act[L];
}

std::vector<double> forward(const MLPSpec& spec, const ParamVector& params,
                            std::span<const double> x) {
    ForwardWorkspace ws;
    return forward_into(spec, params, x, ws);
}

void backward_into(const MLPSpec& spec, const ParamVector& params, const ForwardWorkspace& ws,
                   std::span<const double> output_seed, ParamVector& grad) {
    const int L = spec.num_layers();
    if (static_cast<int>(output_seed.size()) != spec.output_dim())
        throw std::invalid_argument("backward: seed size != output_dim");
    if (grad.size() != params.size())
        throw std::invalid_argument("backward: grad size != params size");
    std::vector<double> delta(output_seed.begin(), output_seed.end());
    std::vector<double> delta_in;
    for (int l = L - 1; l >= 0; --l) {
        const int in = spec.layer_sizes[l];
        const int out = spec.layer_sizes[l + 1];
        const std::size_t off = spec.layer_offset(l);
        const double* W = params.data() + off;
        const std::vector<double>& a = ws.act[l];
        double* gW = grad.data() + off;
        double* gb = gW + static_cast<std::size_t>(out) * in;
        for (int i = 0; i < out; ++i) {
            const double d = delta[i];
            double* grow = gW + static_cast<std::size_t>(i) * in;
            for (int j = 0; j < in; ++j) grow[j] += d * a[j];
            gb[i] += d;
        }
        if (l > 0) {
            delta_in.assign(in, 0.0);
            for (int i = 0; i < out; ++i) {
                const double d = delta[i];
                const double* row = W + static_cast<std::size_t>(i) * in;
                for (int j = 0; j < in; ++j) delta_in[j] += row[j] * d;
            }
            // ReLU mask: act > 0 iff pre-activation > 0, so the subgradient
            // at an exact kink (z == 0) is taken as 0.
            for (int j = 0; j < in; ++j)
                if (!(ws.act[l][j] > 0.0)) delta_in[j] = 0.0;
            delta.swap(delta_in);
        }
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

void to_output_space(std::vector<double>& out, OutputSpace space) {
    if (space == OutputSpace::probs) out = softmax(out);
}

double loss_euclidean(double output, double target) {
    const double d = output - target;
    return 0.5 * d * d;
}

double loss_ce(std::span<const double> logits, int label) {
    if (label < 0 || label >= static_cast<int>(logits.size()))
        throw std::invalid_argument("loss_ce: label " + std::to_string(label) +
                                    " out of range for " + std::to_string(logits.size()) +
                                    " classes");
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    return m + std::log(sum) - logits[label];
}

namespace {

// Per-sample supervised loss and gradient seed on the network output.
double sample_seed(const MLPSpec& spec, const Batch& batch, std::size_t i,
                   const std::vector<double>& out, LossKind kind, std::vector<double>& seed) {
    if (kind == LossKind::euclidean) {
        if (spec.output_dim() != 1)
            throw std::invalid_argument("euclidean loss expects a scalar-output model");
        if (batch.targets.size() != batch.size)
            throw std::invalid_argument("euclidean loss needs one real target per sample");
        seed.assign(1, out[0] - batch.targets[i]);
        return loss_euclidean(out[0], batch.targets[i]);
    }
    if (batch.labels.size() != batch.size)
        throw std::invalid_argument("ce loss needs one class label per sample");
    const int label = batch.labels[i];
    const double loss = loss_ce(out, label);
    seed = softmax(out);
    seed[label] -= 1.0;
    return loss;
}

}  // namespace

LossGrad grad_loss(const MLPSpec& spec, const ParamVector& params, const Batch& batch,
                   LossKind kind, const AuxGradFn& aux) {
    check_params(spec, params);
    if (batch.size == 0) throw std::invalid_argument("grad_loss: empty batch");
    if (batch.features.size() != batch.size * spec.input_dim())
        throw std::invalid_argument("grad_loss: feature span size mismatch");
    const LossKind sup = (kind == LossKind::combined) ? LossKind::ce : kind;

    LossGrad res;
    res.grad.assign(params.size(), 0.0);
    ForwardWorkspace ws;
    std::vector<double> seed;
    for (std::size_t i = 0; i < batch.size; ++i) {
        std::span<const double> x = batch.features.subspan(i * spec.input_dim(), spec.input_dim());
        const std::vector<double>& out = forward_into(spec, params, x, ws);
        res.loss += sample_seed(spec, batch, i, out, sup, seed);
        backward_into(spec, params, ws, seed, res.grad);
    }
    const double inv = 1.0 / static_cast<double>(batch.size);
    res.loss *= inv;
    for (double& g : res.grad) g *= inv;
    if (kind == LossKind::combined && aux) aux(params, res.grad);
    return res;
}

ParamVector grad_output(const MLPSpec& spec, const ParamVector& params, std::span<const double> x,
                        int output_index) {
    check_params(spec, params);
    if (output_index < 0 || output_index >= spec.output_dim())
        throw std::invalid_argument("grad_output: output index out of range");
    ForwardWorkspace ws;
    forward_into(spec, params, x, ws);
    std::vector<double> seed(spec.output_dim(), 0.0);
    seed[output_index] = 1.0;
    ParamVector grad(params.size(), 0.0);
    backward_into(spec, params, ws, seed, grad);
    return grad;
}

double output_grad_sq_norm(const MLPSpec& spec, const ParamVector& params,
                           std::span<const double> x) {
    check_params(spec, params);
    ForwardWorkspace ws;
    forward_into(spec, params, x, ws);
    std::vector<double> seed(spec.output_dim(), 0.0);
    ParamVector grad;
    double total = 0.0;
    for (int k = 0; k < spec.output_dim(); ++k) {
        seed.assign(spec.output_dim(), 0.0);
        seed[k] = 1.0;
        grad.assign(params.size(), 0.0);
        backward_into(spec, params, ws, seed, grad);
        for (double g : grad) total += g * g;
    }
    return total;
}

}  // namespace todlab
