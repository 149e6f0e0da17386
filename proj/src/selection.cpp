#include "todlab/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "todlab/active_loop.hpp"
#include "todlab/checkpoint.hpp"
#include "todlab/io_util.hpp"
#include "todlab/kernels.hpp"
#include "todlab/rng.hpp"

namespace todlab {

const std::vector<std::string>& all_selection_method_names() {
    static const std::vector<std::string> names = {"tod",        "train_loss",  "entropy",
                                                   "least_conf", "margin_conf", "ratio_conf"};
    return names;
}

SelectionMethod parse_selection_method(const std::string& name) {
    const auto& names = all_selection_method_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<SelectionMethod>(i);
    std::string valid;
    for (const std::string& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown selection method '" + name + "' (valid: " + valid + ")");
}

std::string selection_method_name(SelectionMethod m) {
    return all_selection_method_names()[static_cast<int>(m)];
}

namespace {

Sampler uncertainty_sampler_for(SelectionMethod m) {
    switch (m) {
        case SelectionMethod::entropy: return Sampler::entropy;
        case SelectionMethod::least_conf: return Sampler::least_conf;
        case SelectionMethod::margin_conf: return Sampler::margin_conf;
        case SelectionMethod::ratio_conf: return Sampler::ratio_conf;
        default: throw std::logic_error("not an uncertainty method");
    }
}

}  // namespace

double avg_tod(const MLPSpec& spec, const CandidateModel& candidate, std::span<const double> xs,
               std::size_t n, OutputSpace space) {
    if (n == 0) throw std::invalid_argument("avg_tod: empty test set");
    const std::vector<double> norms =
        discrepancy_norms(spec, candidate.params, candidate.baseline, xs, n, space);
    double sum = 0.0;
    for (double v : norms) sum += v * v;
    return sum / static_cast<double>(n);
}

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
}

double candidate_criterion(SelectionMethod method, const MLPSpec& spec,
                           const CandidateModel& cand, std::span<const double> xs, std::size_t n,
                           OutputSpace space) {
    switch (method) {
        case SelectionMethod::tod:
            return avg_tod(spec, cand, xs, n, space);
        case SelectionMethod::train_loss:
            return cand.final_train_loss;
        default:
            return mean_of(
                uncertainty_scores(uncertainty_sampler_for(method), spec, cand.params, xs, n));
    }
}

}  // namespace

RankingResult rank_models(SelectionMethod method, const MLPSpec& spec,
                          const std::vector<CandidateModel>& candidates,
                          std::span<const double> xs, std::size_t n, OutputSpace space) {
    if (candidates.size() < 2) throw std::invalid_argument("rank_models: need >= 2 candidates");
    RankingResult res;
    res.method = selection_method_name(method);
    res.values.reserve(candidates.size());
    for (const CandidateModel& cand : candidates)
        res.values.push_back(candidate_criterion(method, spec, cand, xs, n, space));
    std::vector<std::size_t> pos(candidates.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
        if (res.values[a] != res.values[b]) return res.values[a] < res.values[b];
        return candidates[a].id < candidates[b].id;
    });
    res.order.reserve(candidates.size());
    for (std::size_t p : pos) res.order.push_back(candidates[p].id);
    return res;
}

bool topk_hit(const RankingResult& ranking, int true_best_id, int k) {
    if (k < 1 || k > static_cast<int>(ranking.order.size()))
        throw std::invalid_argument("topk_hit: k out of range");
    if (std::find(ranking.order.begin(), ranking.order.end(), true_best_id) ==
        ranking.order.end())
        throw std::invalid_argument("topk_hit: unknown candidate id " +
                                    std::to_string(true_best_id));
    const auto end = ranking.order.begin() + k;
    return std::find(ranking.order.begin(), end, true_best_id) != end;
}

int sample_level_select(SelectionMethod method, const MLPSpec& spec,
                        const std::vector<CandidateModel>& candidates, std::span<const double> x,
                        OutputSpace space) {
    if (candidates.empty()) throw std::invalid_argument("sample_level_select: no candidates");
    int best_id = candidates.front().id;
    double best_value = 0.0;
    bool first = true;
    for (const CandidateModel& cand : candidates) {
        const double value = candidate_criterion(method, spec, cand, x, 1, space);
        if (first || value < best_value || (value == best_value && cand.id < best_id)) {
            best_id = cand.id;
            best_value = value;
            first = false;
        }
    }
    return best_id;
}

std::vector<CandidateModel> build_candidate_pool(const Dataset& ds, const MLPSpec& spec,
                                                 const TrainConfig& cfg, BaselineGap gap,
                                                 std::span<const std::uint64_t> seeds,
                                                 std::span<const int> epoch_budgets) {
    spec.validate();
    ds.validate();
    if (seeds.size() < 2) throw std::invalid_argument("build_candidate_pool: need >= 2 seeds");
    if (!epoch_budgets.empty() && epoch_budgets.size() != seeds.size())
        throw std::invalid_argument("build_candidate_pool: epoch budget count != seed count");
    if (gap.value < 0) throw std::invalid_argument("build_candidate_pool: negative gap");
    if (gap.value == 0)
        std::fprintf(stderr,
                     "warning: baseline gap 0 makes the baseline equal the final weights; "
                     "every tod criterion will be 0\n");

    const SplitView train_view = subset(ds, Split::train);
    const SplitView test_view = subset(ds, Split::test);
    Batch data;
    data.features = train_view.features;
    data.labels = train_view.labels;
    data.size = train_view.size();

    std::vector<CandidateModel> pool;
    pool.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        TrainConfig run_cfg = cfg;
        if (!epoch_budgets.empty()) run_cfg.epochs = epoch_budgets[i];
        run_cfg.validate();
        const std::size_t steps_per_epoch = (data.size + run_cfg.batch_size - 1) / run_cfg.batch_size;
        const std::int64_t total_steps = static_cast<std::int64_t>(steps_per_epoch) * run_cfg.epochs;
        const std::int64_t gap_steps =
            (gap.kind == BaselineGap::Kind::epochs)
                ? static_cast<std::int64_t>(gap.value) * static_cast<std::int64_t>(steps_per_epoch)
                : gap.value;
        if (gap_steps > total_steps)
            throw std::invalid_argument("build_candidate_pool: gap exceeds the training length");
        const std::int64_t target = total_steps - gap_steps;

        Rng init_rng(mix_seed(seeds[i], rng_tag("init")));
        ParamVector w0 = init_params(spec, init_rng);

        CandidateModel cand;
        cand.id = static_cast<int>(i);
        if (target == 0) cand.baseline = w0;
        TrainCallbacks cb;
        cb.after_step = [&](const OptimState& st) {
            if (st.step_count == target) cand.baseline = st.params;
        };
        TrainResult tr = train(spec, make_optim_state(std::move(w0)), data, run_cfg,
                               mix_seed(seeds[i], rng_tag("train")), LossKind::ce, cb);
        cand.params = std::move(tr.state.params);
        cand.final_train_loss = tr.epoch_loss.back();
        cand.true_test_acc =
            accuracy(spec, cand.params, test_view.features, test_view.labels, test_view.size());
        pool.push_back(std::move(cand));
    }
    return pool;
}

void save_candidates(const std::filesystem::path& dir, const MLPSpec& spec,
                     const std::vector<CandidateModel>& candidates,
                     std::span<const std::uint64_t> seeds, BaselineGap gap) {
    if (seeds.size() != candidates.size())
        throw std::invalid_argument("save_candidates: seed count != candidate count");
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = nlohmann::json::array();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const CandidateModel& cand = candidates[i];
        const std::string base = std::to_string(cand.id);
        save_checkpoint(dir / (base + ".final.ckpt"), spec, cand.params);
        save_checkpoint(dir / (base + ".base.ckpt"), spec, cand.baseline);
        manifest.push_back(
            {{"id", cand.id},
             {"train_loss", cand.final_train_loss},
             {"seed", seeds[i]},
             {"gap",
              {{"kind", gap.kind == BaselineGap::Kind::epochs ? "epochs" : "steps"},
               {"value", gap.value}}}});
    }
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<CandidateModel> load_candidates(const std::filesystem::path& dir) {
    const nlohmann::json manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    if (!manifest.is_array()) throw format_error((dir / "manifest.json").string() + ": not an array");
    std::vector<CandidateModel> pool;
    for (const nlohmann::json& entry : manifest) {
        CandidateModel cand;
        cand.id = entry.at("id").get<int>();
        cand.final_train_loss = entry.at("train_loss").get<double>();
        const std::string base = std::to_string(cand.id);
        Checkpoint final_ck = load_checkpoint(dir / (base + ".final.ckpt"));
        Checkpoint base_ck = load_checkpoint(dir / (base + ".base.ckpt"));
        if (final_ck.spec != base_ck.spec)
            throw format_error("load_candidates: final/baseline architecture mismatch for id " +
                               base);
        cand.params = std::move(final_ck.params);
        cand.baseline = std::move(base_ck.params);
        pool.push_back(std::move(cand));
    }
    return pool;
}

}  // namespace todlab
