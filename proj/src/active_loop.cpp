#include "todlab/active_loop.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "todlab/kernels.hpp"
#include "todlab/rng.hpp"

namespace todlab {

const std::vector<std::string>& all_sampler_names() {
    static const std::vector<std::string> names = {
        "cod", "emaod", "random", "entropy", "least_conf", "margin_conf", "ratio_conf"};
    return names;
}

Sampler parse_sampler(const std::string& name) {
    const auto& names = all_sampler_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<Sampler>(i);
    std::string valid;
    for (const std::string& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown sampler '" + name + "' (valid: " + valid + ")");
}

std::string sampler_name(Sampler s) { return all_sampler_names()[static_cast<int>(s)]; }

void ALConfig::validate() const {
    if (start_frac <= 0.0 || start_frac >= 1.0)
        throw std::invalid_argument("ALConfig: start_frac must be in (0,1)");
    if (budget_frac <= 0.0 || budget_frac >= 1.0)
        throw std::invalid_argument("ALConfig: budget_frac must be in (0,1)");
    if (cycles < 1) throw std::invalid_argument("ALConfig: cycles must be >= 1");
    if (start_frac + cycles * budget_frac > 1.0 + 1e-12)
        throw std::invalid_argument("ALConfig: schedule infeasible, start_frac + cycles*budget_frac > 1");
    if (lambda < 0.0) throw std::invalid_argument("ALConfig: lambda must be >= 0");
    if (alpha < 0.0 || alpha >= 1.0) throw std::invalid_argument("ALConfig: alpha must be in [0,1)");
    if (unlabeled_batch_size < 0)
        throw std::invalid_argument("ALConfig: unlabeled_batch_size must be >= 0");
}

namespace {

// Largest and second-largest probability of one row.
std::pair<double, double> top_two(const double* p, int k) {
    double p1 = p[0], p2 = -1.0;
    for (int j = 1; j < k; ++j) {
        if (p[j] > p1) {
            p2 = p1;
            p1 = p[j];
        } else if (p[j] > p2) {
            p2 = p[j];
        }
    }
    return {p1, p2};
}

}  // namespace

std::vector<double> uncertainty_scores(Sampler sampler, const MLPSpec& spec,
                                       const ParamVector& params, std::span<const double> xs,
                                       std::size_t n) {
    const int k = spec.output_dim();
    if (k < 2)
        throw std::invalid_argument("uncertainty scores need at least 2 output classes");
    const std::vector<double> logits = forward_all(spec, params, xs, n);
    std::vector<double> scores(n);
    std::vector<double> row(k);
    for (std::size_t i = 0; i < n; ++i) {
        row.assign(logits.begin() + i * k, logits.begin() + (i + 1) * k);
        const std::vector<double> p = softmax(row);
        switch (sampler) {
            case Sampler::entropy: {
                double h = 0.0;
                for (double v : p)
                    if (v > 0.0) h -= v * std::log(v);
                scores[i] = h;
                break;
            }
            case Sampler::least_conf: {
                scores[i] = 1.0 - top_two(p.data(), k).first;
                break;
            }
            case Sampler::margin_conf: {
                const auto [p1, p2] = top_two(p.data(), k);
                scores[i] = -(p1 - p2);  // small margin = informative = high score
                break;
            }
            case Sampler::ratio_conf: {
                const auto [p1, p2] = top_two(p.data(), k);
                // p2 floored to keep confident samples finite and ordered
                scores[i] = -(p1 / std::max(p2, 1e-12));
                break;
            }
            default:
                throw std::invalid_argument("uncertainty_scores: not an uncertainty sampler");
        }
    }
    return scores;
}

std::vector<double> acquisition_scores(Sampler sampler, const MLPSpec& spec,
                                       const AcquireContext& ctx, std::span<const double> xs,
                                       std::size_t n) {
    switch (sampler) {
        case Sampler::cod:
            if (!ctx.current || !ctx.previous)
                throw std::invalid_argument("acquisition_scores: cod needs current and previous snapshots");
            return cod_scores(spec, *ctx.current, *ctx.previous, xs, n, ctx.space);
        case Sampler::emaod:
            if (!ctx.current || !ctx.teacher)
                throw std::invalid_argument("acquisition_scores: emaod needs current snapshot and teacher");
            return emaod_scores(spec, ctx.current->params, *ctx.teacher, xs, n, ctx.space);
        case Sampler::random: {
            Rng rng(ctx.random_seed);
            std::vector<double> scores(n);
            for (double& s : scores) s = rng.uniform();
            return scores;
        }
        default:
            if (!ctx.current)
                throw std::invalid_argument("acquisition_scores: sampler needs the current snapshot");
            return uncertainty_scores(sampler, spec, ctx.current->params, xs, n);
    }
}

OptimState& combined_step(OptimState& state, const MLPSpec& spec, const Batch& labeled,
                          std::span<const double> unlabeled_xs, std::size_t n_unlabeled,
                          ParamVector& teacher, double lambda, double alpha,
                          const TrainConfig& cfg, OutputSpace space) {
    LossGrad lg = grad_loss(spec, state.params, labeled, LossKind::ce);
    if (lambda > 0.0) {
        // skipped entirely at lambda == 0 so the supervised-only trajectory
        // is reproduced bit for bit
        const UnsupLossGrad ug =
            unsup_loss_and_grad(spec, state.params, teacher, unlabeled_xs, n_unlabeled, space);
        for (std::size_t i = 0; i < lg.grad.size(); ++i) lg.grad[i] += lambda * ug.grad[i];
    }
    sgd_step(state, lg.grad, cfg);
    teacher = ema_update(teacher, state.params, alpha);
    return state;
}

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void gather_rows(const SplitView& view, const std::vector<std::size_t>& rows, int dim,
                 std::vector<double>& feat, std::vector<int>& labels) {
    feat.resize(rows.size() * dim);
    labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(view.features.data() + rows[i] * dim, dim, feat.data() + i * dim);
        labels[i] = view.labels[rows[i]];
    }
}

}  // namespace

ALResult run_active_learning(const Dataset& ds, const MLPSpec& spec, const ALConfig& acfg,
                             const TrainConfig& tcfg, std::uint64_t seed, bool timing) {
    spec.validate();
    acfg.validate();
    tcfg.validate();
    ds.validate();
    if (spec.input_dim() != ds.dim || spec.output_dim() != ds.n_classes)
        throw std::invalid_argument("run_active_learning: model does not fit the dataset shape");

    const SplitView train_view = subset(ds, Split::train);
    const SplitView test_view = subset(ds, Split::test);
    if (test_view.size() == 0)
        throw std::invalid_argument("run_active_learning: dataset has no test split");
    const std::size_t n_train = train_view.size();
    const int d = ds.dim;
    const std::size_t b =
        static_cast<std::size_t>(std::floor(acfg.budget_frac * static_cast<double>(n_train)));
    if (b < 1) throw std::invalid_argument("run_active_learning: budget rounds to zero samples");

    ALResult res;
    res.pool = init_pool(n_train, acfg.start_frac, mix_seed(seed, rng_tag("pool")));
    PoolState& pool = res.pool;

    Snapshot prev;
    std::int64_t global_step = 0;
    ParamVector teacher;
    std::vector<double> feat, uxs;
    std::vector<int> labels, ulabels;

    for (int c = 1; c <= acfg.cycles; ++c) {
        const auto t_start = std::chrono::steady_clock::now();

        Rng init_rng(mix_seed(seed, rng_tag("init"), static_cast<std::uint64_t>(c)));
        ParamVector w0 = init_params(spec, init_rng);
        if (c == 1) prev = Snapshot{w0, 0, 0, 0};
        teacher = w0;

        gather_rows(train_view, pool.labeled, d, feat, labels);
        Batch data;
        data.features = feat;
        data.labels = labels;
        data.size = labels.size();

        const int ub = acfg.unlabeled_batch_size > 0 ? acfg.unlabeled_batch_size : tcfg.batch_size;
        Rng unsup_rng(mix_seed(seed, rng_tag("unsup"), static_cast<std::uint64_t>(c)));
        std::vector<double> unsup_feat;
        const bool use_unsup = acfg.semi_enabled && acfg.lambda > 0.0 && !pool.unlabeled.empty();

        TrainCallbacks cb;
        if (use_unsup) {
            cb.aux = [&](const ParamVector& params, ParamVector& grad) {
                unsup_feat.resize(static_cast<std::size_t>(ub) * d);
                for (int i = 0; i < ub; ++i) {
                    const std::size_t row = pool.unlabeled[unsup_rng.uniform_index(pool.unlabeled.size())];
                    std::copy_n(train_view.features.data() + row * d, d,
                                unsup_feat.data() + static_cast<std::size_t>(i) * d);
                }
                const UnsupLossGrad ug = unsup_loss_and_grad(spec, params, teacher, unsup_feat,
                                                             static_cast<std::size_t>(ub),
                                                             acfg.output_space);
                for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += acfg.lambda * ug.grad[j];
            };
        }
        cb.after_step = [&](const OptimState& st) {
            teacher = ema_update(teacher, st.params, acfg.alpha);
        };

        TrainResult tr = train(spec, make_optim_state(std::move(w0)), data, tcfg,
                               mix_seed(seed, rng_tag("train"), static_cast<std::uint64_t>(c)),
                               use_unsup ? LossKind::combined : LossKind::ce, cb);
        global_step += tr.state.step_count;
        Snapshot snap{std::move(tr.state.params), c, tcfg.epochs, global_step};

        gather_rows(train_view, pool.unlabeled, d, uxs, ulabels);
        const std::size_t nu = ulabels.size();

        CycleRecord rec;
        rec.cycle = c;
        rec.labeled_frac = static_cast<double>(data.size) / static_cast<double>(n_train);
        rec.test_acc =
            accuracy(spec, snap.params, test_view.features, test_view.labels, test_view.size());
        rec.per_class_acc = per_class_accuracy(spec, snap.params, test_view.features,
                                               test_view.labels, test_view.size(), ds.n_classes);
        rec.mean_train_loss = tr.epoch_loss.back();

        const std::vector<double> cods = cod_scores(spec, snap, prev, uxs, nu, acfg.output_space);
        const std::vector<double> true_losses = ce_losses(spec, snap.params, uxs, ulabels, nu);
        rec.mean_cod = mean_of(cods);
        rec.mean_true_loss = mean_of(true_losses);
        res.qualities.push_back(nu >= 10 ? loss_estimation_quality(cods, true_losses)
                                         : QualityReport{});

        AcquireContext ctx;
        ctx.current = &snap;
        ctx.previous = &prev;
        ctx.teacher = &teacher;
        ctx.space = acfg.output_space;
        ctx.random_seed = mix_seed(seed, rng_tag("acquire"), static_cast<std::uint64_t>(c));
        const std::vector<double> scores = acquisition_scores(acfg.sampler, spec, ctx, uxs, nu);
        annotate(pool, select_top_b(scores, pool.unlabeled, b));
        pool.validate(n_train);

        if (timing) {
            const auto t_end = std::chrono::steady_clock::now();
            rec.seconds = std::chrono::duration<double>(t_end - t_start).count();
        }
        res.records.push_back(std::move(rec));
        prev = std::move(snap);
    }
    res.final_params = prev.params;
    res.final_teacher = teacher;
    return res;
}

}  // namespace todlab
