// Acquisition scoring, the combined semisupervised step, and the full
// active-learning loop: determinism, pool bookkeeping, and the documented
// seeding protocol.

#include <cmath>
#include <vector>

#include "todlab/active_loop.hpp"
#include "todlab/rng.hpp"

#include "test_util.hpp"

using namespace todlab;

namespace {

TrainConfig small_train_config() {
    TrainConfig cfg;
    cfg.lr = 0.1;
    cfg.momentum = 0.9;
    cfg.weight_decay = 0.0;
    cfg.batch_size = 16;
    cfg.epochs = 8;
    cfg.lr_drop_factor = 1.0;
    cfg.lr_drop_at_frac = 1.0;
    return cfg;
}

ALConfig small_al_config() {
    ALConfig acfg;
    acfg.start_frac = 0.2;
    acfg.budget_frac = 0.1;
    acfg.cycles = 3;
    acfg.sampler = Sampler::cod;
    return acfg;
}

void test_sampler_names() {
    for (const std::string& name : all_sampler_names())
        CHECK(sampler_name(parse_sampler(name)) == name);
    CHECK(all_sampler_names().size() == 7);
    try {
        parse_sampler("bogus");
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bogus") != std::string::npos);
        CHECK(msg.find("cod") != std::string::npos);  // lists the valid names
    }
}

void test_al_config_validation() {
    small_al_config().validate();
    ALConfig bad;

    bad = small_al_config();
    bad.start_frac = 0.0;
    CHECK_THROWS(std::invalid_argument, bad.validate());
    bad = small_al_config();
    bad.budget_frac = 1.0;
    CHECK_THROWS(std::invalid_argument, bad.validate());
    bad = small_al_config();
    bad.cycles = 0;
    CHECK_THROWS(std::invalid_argument, bad.validate());
    bad = small_al_config();
    bad.start_frac = 0.5;
    bad.budget_frac = 0.1;
    bad.cycles = 6;  // 0.5 + 0.6 > 1
    CHECK_THROWS(std::invalid_argument, bad.validate());
    bad = small_al_config();
    bad.lambda = -0.1;
    CHECK_THROWS(std::invalid_argument, bad.validate());
    bad = small_al_config();
    bad.alpha = 1.0;
    CHECK_THROWS(std::invalid_argument, bad.validate());
    bad = small_al_config();
    bad.unlabeled_batch_size = -1;
    CHECK_THROWS(std::invalid_argument, bad.validate());
}

// Identity model: logits == input, so tests control the posterior directly.
MLPSpec identity_spec(int k) { return MLPSpec{{k, k}}; }

ParamVector identity_params(int k) {
    ParamVector p(static_cast<std::size_t>(k) * k + k, 0.0);
    for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i) * k + i] = 1.0;
    return p;
}

void test_uncertainty_hand_values() {
    const int k = 4;
    const MLPSpec spec = identity_spec(k);
    const ParamVector w = identity_params(k);

    // Row 0: uniform posterior. Row 1: extremely confident posterior.
    const std::vector<double> xs = {0.0, 0.0, 0.0, 0.0, 50.0, 0.0, 0.0, 0.0};

    const std::vector<double> ent = uncertainty_scores(Sampler::entropy, spec, w, xs, 2);
    CHECK_CLOSE(ent[0], std::log(4.0), 1e-12);
    CHECK(ent[1] < 1e-12);

    const std::vector<double> lc = uncertainty_scores(Sampler::least_conf, spec, w, xs, 2);
    CHECK_CLOSE(lc[0], 1.0 - 0.25, 1e-12);
    CHECK(lc[1] < 1e-12);

    const std::vector<double> mc = uncertainty_scores(Sampler::margin_conf, spec, w, xs, 2);
    CHECK_CLOSE(mc[0], 0.0, 1e-12);
    CHECK_CLOSE(mc[1], -1.0, 1e-12);

    const std::vector<double> rc = uncertainty_scores(Sampler::ratio_conf, spec, w, xs, 2);
    CHECK_CLOSE(rc[0], -1.0, 1e-12);
    CHECK(rc[1] < -1e10);  // p2 underflows to the 1e-12 floor

    // All four rank the uniform row above the confident row.
    CHECK(ent[0] > ent[1]);
    CHECK(lc[0] > lc[1]);
    CHECK(mc[0] > mc[1]);
    CHECK(rc[0] > rc[1]);

    // Shifting every logit of a sample by a constant leaves scores unchanged
    // (integer logits so the shift is exact in floating point).
    const std::vector<double> base = {1.0, -2.0, 3.0, 0.0};
    std::vector<double> shifted = base;
    for (double& v : shifted) v += 512.0;
    std::vector<double> both = base;
    both.insert(both.end(), shifted.begin(), shifted.end());
    for (Sampler s :
         {Sampler::entropy, Sampler::least_conf, Sampler::margin_conf, Sampler::ratio_conf}) {
        const std::vector<double> sc = uncertainty_scores(s, spec, w, both, 2);
        CHECK(sc[0] == sc[1]);
    }

    CHECK_THROWS(std::invalid_argument,
                 uncertainty_scores(Sampler::cod, spec, w, xs, 2));
    const MLPSpec scalar{{2, 1}};
    CHECK_THROWS(std::invalid_argument,
                 uncertainty_scores(Sampler::entropy, scalar, ParamVector(3, 0.0),
                                    std::vector<double>{1.0, 2.0}, 1));
}

void test_acquisition_scores() {
    const MLPSpec spec{{2, 8, 2}};
    Rng rng(401);
    const Snapshot cur{init_params(spec, rng), 2, 0, 100};
    const Snapshot prev{init_params(spec, rng), 1, 0, 50};
    const ParamVector teacher = init_params(spec, rng);
    std::vector<double> xs(10);
    for (double& x : xs) x = rng.normal();

    AcquireContext ctx;
    ctx.current = &cur;
    ctx.previous = &prev;
    ctx.teacher = &teacher;
    ctx.space = OutputSpace::probs;
    ctx.random_seed = 99;

    CHECK(acquisition_scores(Sampler::cod, spec, ctx, xs, 5) ==
          cod_scores(spec, cur, prev, xs, 5, OutputSpace::probs));
    CHECK(acquisition_scores(Sampler::emaod, spec, ctx, xs, 5) ==
          emaod_scores(spec, cur.params, teacher, xs, 5, OutputSpace::probs));
    CHECK(acquisition_scores(Sampler::entropy, spec, ctx, xs, 5) ==
          uncertainty_scores(Sampler::entropy, spec, cur.params, xs, 5));

    const std::vector<double> r1 = acquisition_scores(Sampler::random, spec, ctx, xs, 5);
    CHECK(r1 == acquisition_scores(Sampler::random, spec, ctx, xs, 5));
    ctx.random_seed = 100;
    CHECK(r1 != acquisition_scores(Sampler::random, spec, ctx, xs, 5));
    for (double v : r1) CHECK(v >= 0.0 && v < 1.0);

    AcquireContext missing;
    missing.current = &cur;  // no previous, no teacher
    CHECK_THROWS(std::invalid_argument,
                 acquisition_scores(Sampler::cod, spec, missing, xs, 5));
    CHECK_THROWS(std::invalid_argument,
                 acquisition_scores(Sampler::emaod, spec, missing, xs, 5));
    AcquireContext empty;
    CHECK_THROWS(std::invalid_argument,
                 acquisition_scores(Sampler::entropy, spec, empty, xs, 5));
}

void test_combined_step_formula() {
    const MLPSpec spec{{2, 6, 3}};
    Rng rng(421);
    const ParamVector w0 = init_params(spec, rng);
    ParamVector teacher = init_params(spec, rng);
    const ParamVector teacher0 = teacher;

    const std::vector<double> lxs = {0.1, -0.4, 1.2, 0.8, -0.9, 0.3};
    const std::vector<int> lys = {0, 2, 1};
    Batch labeled;
    labeled.features = lxs;
    labeled.labels = lys;
    labeled.size = 3;
    std::vector<double> uxs(8);
    for (double& x : uxs) x = rng.normal();

    const TrainConfig cfg = small_train_config();
    const double lambda = 0.25, alpha = 0.9;

    OptimState state = make_optim_state(w0);
    combined_step(state, spec, labeled, uxs, 4, teacher, lambda, alpha, cfg,
                  OutputSpace::probs);

    // Oracle: supervised CE grad + lambda * consistency grad, one sgd_step,
    // then the EMA update of the teacher against the new student.
    LossGrad lg = grad_loss(spec, w0, labeled, LossKind::ce);
    const UnsupLossGrad ug =
        unsup_loss_and_grad(spec, w0, teacher0, uxs, 4, OutputSpace::probs);
    for (std::size_t i = 0; i < lg.grad.size(); ++i) lg.grad[i] += lambda * ug.grad[i];
    OptimState want = make_optim_state(w0);
    sgd_step(want, lg.grad, cfg);

    CHECK(state.params == want.params);
    CHECK(teacher == ema_update(teacher0, want.params, alpha));

    // lambda == 0 reproduces the purely supervised step bit for bit.
    OptimState plain = make_optim_state(w0);
    ParamVector t2 = teacher0;
    combined_step(plain, spec, labeled, uxs, 4, t2, 0.0, alpha, cfg, OutputSpace::probs);
    OptimState sup = make_optim_state(w0);
    sgd_step(sup, grad_loss(spec, w0, labeled, LossKind::ce).grad, cfg);
    CHECK(plain.params == sup.params);
}

Dataset loop_dataset() { return gen_two_moons(200, 0.2, 0.25, 5); }

void test_loop_records_and_pool() {
    const Dataset ds = loop_dataset();  // 150 train / 50 test
    const MLPSpec spec{{2, 16, 2}};
    const ALResult res = run_active_learning(ds, spec, small_al_config(),
                                             small_train_config(), 11);

    CHECK(res.records.size() == 3);
    CHECK(res.qualities.size() == 3);
    // start 0.2 -> 30 labeled; budget 0.1 -> +15 per cycle, recorded before
    // the cycle's acquisition.
    const double fr[] = {30.0 / 150.0, 45.0 / 150.0, 60.0 / 150.0};
    for (int c = 0; c < 3; ++c) {
        const CycleRecord& r = res.records[static_cast<std::size_t>(c)];
        CHECK(r.cycle == c + 1);
        CHECK_CLOSE(r.labeled_frac, fr[c], 1e-15);
        CHECK(r.test_acc >= 0.0 && r.test_acc <= 1.0);
        CHECK(r.per_class_acc.size() == 2);
        CHECK(r.mean_cod > 0.0);
        CHECK(r.mean_true_loss > 0.0);
        CHECK(r.seconds == 0.0);  // timing off
    }
    res.pool.validate(150);
    CHECK(res.pool.labeled.size() == 75);
    CHECK(res.pool.cycle == 3);
    CHECK(res.final_params.size() == spec.param_count());
    CHECK(res.final_teacher.size() == spec.param_count());

    // Learning is happening: the final model beats chance comfortably.
    CHECK(res.records.back().test_acc > 0.7);
}

void test_loop_determinism_and_timing() {
    const Dataset ds = loop_dataset();
    const MLPSpec spec{{2, 16, 2}};
    const ALConfig acfg = small_al_config();
    const TrainConfig tcfg = small_train_config();

    const ALResult a = run_active_learning(ds, spec, acfg, tcfg, 11);
    const ALResult b = run_active_learning(ds, spec, acfg, tcfg, 11);
    CHECK(a.final_params == b.final_params);
    for (std::size_t c = 0; c < a.records.size(); ++c) {
        CHECK(a.records[c].test_acc == b.records[c].test_acc);
        CHECK(a.records[c].mean_cod == b.records[c].mean_cod);
        CHECK(a.records[c].mean_true_loss == b.records[c].mean_true_loss);
    }
    CHECK(a.pool.labeled == b.pool.labeled);

    const ALResult c = run_active_learning(ds, spec, acfg, tcfg, 12);
    CHECK(c.final_params != a.final_params);

    // Timing only fills in seconds; the math is untouched.
    const ALResult timed = run_active_learning(ds, spec, acfg, tcfg, 11, true);
    CHECK(timed.final_params == a.final_params);
    CHECK(timed.records.front().seconds > 0.0);
}

void test_loop_lambda_zero_matches_supervised() {
    const Dataset ds = loop_dataset();
    const MLPSpec spec{{2, 16, 2}};
    const TrainConfig tcfg = small_train_config();

    ALConfig sup = small_al_config();
    sup.semi_enabled = false;
    ALConfig semi0 = small_al_config();
    semi0.semi_enabled = true;
    semi0.lambda = 0.0;
    CHECK(run_active_learning(ds, spec, semi0, tcfg, 31).final_params ==
          run_active_learning(ds, spec, sup, tcfg, 31).final_params);

    ALConfig semi = small_al_config();
    semi.semi_enabled = true;
    semi.lambda = 0.1;
    CHECK(run_active_learning(ds, spec, semi, tcfg, 31).final_params !=
          run_active_learning(ds, spec, sup, tcfg, 31).final_params);
}

void test_loop_alpha_zero_teacher_tracks_student() {
    const Dataset ds = loop_dataset();
    const MLPSpec spec{{2, 16, 2}};
    ALConfig acfg = small_al_config();
    acfg.alpha = 0.0;
    const ALResult res = run_active_learning(ds, spec, acfg, small_train_config(), 41);
    CHECK(res.final_teacher == res.final_params);
}

void test_single_cycle_random_is_plain_training() {
    // One cycle with the random sampler is exactly: draw the pool, train
    // once on the labeled rows with the documented per-cycle seeds.
    const Dataset ds = loop_dataset();
    const MLPSpec spec{{2, 16, 2}};
    const TrainConfig tcfg = small_train_config();
    ALConfig acfg = small_al_config();
    acfg.cycles = 1;
    acfg.sampler = Sampler::random;
    const std::uint64_t seed = 77;

    const ALResult res = run_active_learning(ds, spec, acfg, tcfg, seed);

    const SplitView train_view = subset(ds, Split::train);
    const PoolState pool = init_pool(train_view.size(), acfg.start_frac,
                                     mix_seed(seed, rng_tag("pool")));
    std::vector<double> feat;
    std::vector<int> labels;
    for (std::size_t row : pool.labeled) {
        for (int j = 0; j < ds.dim; ++j)
            feat.push_back(train_view.features[row * static_cast<std::size_t>(ds.dim) + j]);
        labels.push_back(train_view.labels[row]);
    }
    Batch data;
    data.features = feat;
    data.labels = labels;
    data.size = labels.size();
    Rng init_rng(mix_seed(seed, rng_tag("init"), 1));
    const TrainResult tr =
        train(spec, make_optim_state(init_params(spec, init_rng)), data, tcfg,
              mix_seed(seed, rng_tag("train"), 1), LossKind::ce, {});
    CHECK(res.final_params == tr.state.params);
    CHECK(res.records[0].mean_train_loss == tr.epoch_loss.back());
}

void test_loop_validation() {
    const Dataset ds = loop_dataset();
    const TrainConfig tcfg = small_train_config();

    // Model shape must match the dataset.
    CHECK_THROWS(std::invalid_argument,
                 run_active_learning(ds, MLPSpec{{3, 8, 2}}, small_al_config(), tcfg, 1));
    CHECK_THROWS(std::invalid_argument,
                 run_active_learning(ds, MLPSpec{{2, 8, 5}}, small_al_config(), tcfg, 1));

    // Budget that floors to zero samples.
    ALConfig tiny = small_al_config();
    tiny.budget_frac = 0.001;
    CHECK_THROWS(std::invalid_argument,
                 run_active_learning(ds, MLPSpec{{2, 8, 2}}, tiny, tcfg, 1));
}

}  // namespace

int main() {
    test_sampler_names();
    test_al_config_validation();
    test_uncertainty_hand_values();
    test_acquisition_scores();
    test_combined_step_formula();
    test_loop_records_and_pool();
    test_loop_determinism_and_timing();
    test_loop_lambda_zero_matches_supervised();
    test_loop_alpha_zero_teacher_tracks_student();
    test_single_cycle_random_is_plain_training();
    test_loop_validation();
    return testutil::summary("test_active_loop");
}
