#include "todlab/pool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "todlab/rng.hpp"

namespace todlab {

void PoolState::validate(std::size_t n_train) const {
    if (labeled.size() + unlabeled.size() != n_train)
        throw std::logic_error("PoolState: sets do not cover the training indices");
    if (!std::is_sorted(labeled.begin(), labeled.end()) ||
        !std::is_sorted(unlabeled.begin(), unlabeled.end()))
        throw std::logic_error("PoolState: index sets must be sorted");
    std::vector<char> seen(n_train, 0);
    for (std::size_t i : labeled) {
        if (i >= n_train || seen[i]) throw std::logic_error("PoolState: bad or duplicate index");
        seen[i] = 1;
    }
    for (std::size_t i : unlabeled) {
        if (i >= n_train || seen[i]) throw std::logic_error("PoolState: bad or duplicate index");
        seen[i] = 1;
    }
}

PoolState init_pool(std::size_t n_train, double start_frac, std::uint64_t seed) {
    if (start_frac <= 0.0 || start_frac >= 1.0)
        throw std::invalid_argument("init_pool: start_frac must be in (0,1)");
    const std::size_t n_labeled =
        static_cast<std::size_t>(std::floor(start_frac * static_cast<double>(n_train)));
    if (n_labeled < 1 || n_labeled >= n_train)
        throw std::invalid_argument("init_pool: degenerate labeled size " +
                                    std::to_string(n_labeled) + " of " + std::to_string(n_train));
    std::vector<std::size_t> all(n_train);
    std::iota(all.begin(), all.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(all);
    PoolState pool;
    pool.labeled.assign(all.begin(), all.begin() + n_labeled);
    pool.unlabeled.assign(all.begin() + n_labeled, all.end());
    std::sort(pool.labeled.begin(), pool.labeled.end());
    std::sort(pool.unlabeled.begin(), pool.unlabeled.end());
    return pool;
}

void annotate(PoolState& pool, const std::vector<std::size_t>& chosen) {
    for (std::size_t idx : chosen) {
        const auto it = std::lower_bound(pool.unlabeled.begin(), pool.unlabeled.end(), idx);
        if (it == pool.unlabeled.end() || *it != idx)
            throw std::invalid_argument("annotate: index " + std::to_string(idx) +
                                        " is not unlabeled");
        pool.unlabeled.erase(it);
    }
    pool.labeled.insert(pool.labeled.end(), chosen.begin(), chosen.end());
    std::sort(pool.labeled.begin(), pool.labeled.end());
    ++pool.cycle;
}

std::vector<std::size_t> select_top_b(std::span<const double> scores,
                                      std::span<const std::size_t> indices, std::size_t b) {
    if (scores.size() != indices.size())
        throw std::invalid_argument("select_top_b: scores/indices length mismatch");
    if (b > scores.size())
        throw std::invalid_argument("select_top_b: b exceeds the candidate count");
    std::vector<std::size_t> pos(scores.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t c) {
        if (scores[a] != scores[c]) return scores[a] > scores[c];
        return indices[a] < indices[c];
    });
    std::vector<std::size_t> chosen(b);
    for (std::size_t i = 0; i < b; ++i) chosen[i] = indices[pos[i]];
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<int> inject_label_noise(std::span<const int> labels, double p, int n_classes,
                                    std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("inject_label_noise: p must be in [0,1]");
    if (n_classes < 2 && p > 0.0)
        throw std::invalid_argument("inject_label_noise: need at least 2 classes to flip");
    std::vector<int> noisy(labels.begin(), labels.end());
    if (p == 0.0) return noisy;
    Rng rng(seed);
    for (int& label : noisy) {
        if (rng.uniform() >= p) continue;
        // uniform over the other n_classes-1 classes
        const int offset = 1 + static_cast<int>(rng.uniform_index(n_classes - 1));
        label = (label + offset) % n_classes;
    }
    return noisy;
}

ParamVector ema_update(const ParamVector& teacher, const ParamVector& w, double alpha) {
    if (teacher.size() != w.size()) throw std::invalid_argument("ema_update: shape mismatch");
    if (alpha < 0.0 || alpha >= 1.0)
        throw std::invalid_argument("ema_update: alpha must be in [0,1)");
    ParamVector next(teacher.size());
    for (std::size_t i = 0; i < next.size(); ++i)
        next[i] = alpha * teacher[i] + (1.0 - alpha) * w[i];
    return next;
}

UnsupLossGrad unsup_loss_and_grad(const MLPSpec& spec, const ParamVector& w,
                                  const ParamVector& teacher, std::span<const double> xs,
                                  std::size_t n, OutputSpace space) {
    check_params(spec, w);
    check_params(spec, teacher);
    if (n == 0) throw std::invalid_argument("unsup_loss_and_grad: empty batch");
    const int d = spec.input_dim();
    const int k = spec.output_dim();
    UnsupLossGrad res;
    res.grad.assign(w.size(), 0.0);
    ForwardWorkspace ws;
    std::vector<double> out_s, out_t, seed(k);
    for (std::size_t i = 0; i < n; ++i) {
        const std::span<const double> x = xs.subspan(i * d, d);
        out_t = forward(spec, teacher, x);
        out_s = forward_into(spec, w, x, ws);  // keep ws for the backward pass
        to_output_space(out_t, space);
        std::vector<double> g_s = out_s;
        to_output_space(g_s, space);
        double sq = 0.0;
        std::vector<double> up(k);  // d loss / d (output-space value)
        for (int j = 0; j < k; ++j) {
            const double diff = g_s[j] - out_t[j];
            sq += diff * diff;
            up[j] = 2.0 * diff;
        }
        res.loss += sq;
        if (space == OutputSpace::logits) {
            seed = up;
        } else {
            // pull the upstream gradient back through softmax:
            // seed_z[j] = p_j * (up_j - sum_m p_m up_m)
            double dot = 0.0;
            for (int j = 0; j < k; ++j) dot += g_s[j] * up[j];
            for (int j = 0; j < k; ++j) seed[j] = g_s[j] * (up[j] - dot);
        }
        backward_into(spec, w, ws, seed, res.grad);
    }
    const double inv = 1.0 / static_cast<double>(n);
    res.loss *= inv;
    for (double& g : res.grad) g *= inv;
    return res;
}

}  // namespace todlab
