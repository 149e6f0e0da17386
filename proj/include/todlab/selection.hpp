#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "todlab/dataset.hpp"
#include "todlab/mlp.hpp"
#include "todlab/optim.hpp"

namespace todlab {

// A trained model plus the checkpoint taken a fixed interval earlier.
// true_test_acc is for the evaluation harness only; no selector reads it.
struct CandidateModel {
    int id = 0;
    ParamVector params;
    ParamVector baseline;
    double final_train_loss = 0.0;
    double true_test_acc = 0.0;
};

enum class SelectionMethod { tod, train_loss, entropy, least_conf, margin_conf, ratio_conf };

SelectionMethod parse_selection_method(const std::string& name);
std::string selection_method_name(SelectionMethod m);
const std::vector<std::string>& all_selection_method_names();

struct RankingResult {
    std::string method;
    std::vector<int> order;      // candidate ids, ascending criterion (best predicted first)
    std::vector<double> values;  // criterion per candidate, in input order
};

// Mean over the test set of the squared output distance between a
// candidate's final and baseline weights.
double avg_tod(const MLPSpec& spec, const CandidateModel& candidate, std::span<const double> xs,
               std::size_t n, OutputSpace space);

// Lower criterion = predicted better. tod -> avg_tod; train_loss -> recorded
// final loss; uncertainty methods -> mean per-sample uncertainty over the
// test inputs. Ties broken by candidate id.
RankingResult rank_models(SelectionMethod method, const MLPSpec& spec,
                          const std::vector<CandidateModel>& candidates,
                          std::span<const double> xs, std::size_t n, OutputSpace space);

// True iff true_best_id appears among the first k ranked candidates.
bool topk_hit(const RankingResult& ranking, int true_best_id, int k);

// Candidate id with the smallest per-sample criterion on one input x.
int sample_level_select(SelectionMethod method, const MLPSpec& spec,
                        const std::vector<CandidateModel>& candidates, std::span<const double> x,
                        OutputSpace space);

struct BaselineGap {
    enum class Kind { epochs, steps };
    Kind kind = Kind::epochs;
    int value = 1;
};

// Trains seeds.size() models on the train split (optionally with distinct
// epoch budgets, to spread quality), keeping the checkpoint `gap` before the
// end of each run as the baseline. Records final train loss and test
// accuracy. gap = 0 is allowed but degenerate (baseline = final weights);
// a warning goes to stderr.
std::vector<CandidateModel> build_candidate_pool(const Dataset& ds, const MLPSpec& spec,
                                                 const TrainConfig& cfg, BaselineGap gap,
                                                 std::span<const std::uint64_t> seeds,
                                                 std::span<const int> epoch_budgets = {});

// Persists candidates as <id>.final.ckpt / <id>.base.ckpt pairs plus
// manifest.json (id, train loss, seed, gap) in the given directory.
void save_candidates(const std::filesystem::path& dir, const MLPSpec& spec,
                     const std::vector<CandidateModel>& candidates,
                     std::span<const std::uint64_t> seeds, BaselineGap gap);

// Loads what save_candidates wrote; true_test_acc comes back as 0 (it is
// never persisted) and must be recomputed by the harness if needed.
std::vector<CandidateModel> load_candidates(const std::filesystem::path& dir);

}  // namespace todlab
