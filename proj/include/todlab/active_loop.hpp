#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "todlab/dataset.hpp"
#include "todlab/discrepancy.hpp"
#include "todlab/optim.hpp"
#include "todlab/pool.hpp"
#include "todlab/quality.hpp"

namespace todlab {

// Acquisition strategies. All scores follow one convention: HIGHER = more
// informative = acquired first.
enum class Sampler { cod, emaod, random, entropy, least_conf, margin_conf, ratio_conf };

Sampler parse_sampler(const std::string& name);  // rejects unknown names, listing valid ones
std::string sampler_name(Sampler s);
const std::vector<std::string>& all_sampler_names();

struct ALConfig {
    double start_frac = 0.10;
    double budget_frac = 0.05;
    int cycles = 7;
    Sampler sampler = Sampler::cod;
    bool semi_enabled = false;
    double lambda = 0.05;  // weight of the consistency loss
    double alpha = 0.999;  // EMA teacher decay
    int unlabeled_batch_size = 0;  // 0 = same as the labeled batch size
    OutputSpace output_space = OutputSpace::probs;

    void validate() const;  // also checks start_frac + cycles*budget_frac <= 1
};

// Everything measured at the end of one cycle.
struct CycleRecord {
    int cycle = 0;
    double labeled_frac = 0.0;  // fraction the cycle's model was trained on
    double test_acc = 0.0;
    std::vector<double> per_class_acc;
    double mean_train_loss = 0.0;  // final-epoch mean supervised loss
    double mean_cod = 0.0;         // mean cycle discrepancy over the unlabeled pool
    double mean_true_loss = 0.0;   // mean CE over the unlabeled pool (held-out labels)
    double seconds = 0.0;          // 0 unless timing was requested
};

// Inputs for one acquisition call; which fields must be set depends on the
// sampler (cod needs previous, emaod needs teacher, random needs the seed).
struct AcquireContext {
    const Snapshot* current = nullptr;
    const Snapshot* previous = nullptr;
    const ParamVector* teacher = nullptr;
    OutputSpace space = OutputSpace::probs;
    std::uint64_t random_seed = 0;
};

std::vector<double> acquisition_scores(Sampler sampler, const MLPSpec& spec,
                                       const AcquireContext& ctx, std::span<const double> xs,
                                       std::size_t n);

// Per-sample uncertainty of one model (entropy, least_conf, margin_conf or
// ratio_conf only); the building block shared by acquisition and by the
// model-selection baselines.
std::vector<double> uncertainty_scores(Sampler sampler, const MLPSpec& spec,
                                       const ParamVector& params, std::span<const double> xs,
                                       std::size_t n);

// One semisupervised optimizer step: sgd_step on grad(mean CE over the
// labeled batch + lambda * consistency loss over the unlabeled batch), then
// an EMA update of the teacher.
OptimState& combined_step(OptimState& state, const MLPSpec& spec, const Batch& labeled,
                          std::span<const double> unlabeled_xs, std::size_t n_unlabeled,
                          ParamVector& teacher, double lambda, double alpha,
                          const TrainConfig& cfg, OutputSpace space);

struct ALResult {
    std::vector<CycleRecord> records;
    // Score-vs-true-loss diagnostics of the cycle discrepancy, one per cycle.
    std::vector<QualityReport> qualities;
    ParamVector final_params;
    ParamVector final_teacher;
    PoolState pool;
};

// Full pool-based loop: per cycle, retrain from a fresh seeded init on the
// labeled pool (teacher reset to that init and EMA-updated every step),
// score the unlabeled pool, annotate the top b, record metrics. Every part
// is a pure function of (dataset, configs, seed). Setting `timing` fills
// CycleRecord.seconds with wall-clock measurements (off by default so that
// reruns are byte-identical).
ALResult run_active_learning(const Dataset& ds, const MLPSpec& spec, const ALConfig& acfg,
                             const TrainConfig& tcfg, std::uint64_t seed, bool timing = false);

}  // namespace todlab
