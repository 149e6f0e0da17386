#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "todlab/checkpoint.hpp"
#include "todlab/experiment.hpp"
#include "todlab/io_util.hpp"
#include "todlab/rng.hpp"

#include "experiment_util.hpp"

namespace todlab {

namespace {

using detail::Stats;
using detail::stats;
using nlohmann::json;
namespace fs = std::filesystem;

// Copies the dataset with each train-split label flipped with probability p;
// the test split keeps its true labels. Keyed off the run seed so that the
// corruption is part of the (config, seed) -> outputs function.
Dataset with_label_noise(const Dataset& base, double p, std::uint64_t seed) {
    Dataset ds = base;
    const std::vector<std::size_t> idx = ds.indices(Split::train);
    std::vector<int> sub(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) sub[i] = ds.labels[idx[i]];
    const std::vector<int> flipped = inject_label_noise(sub, p, ds.n_classes, seed);
    for (std::size_t i = 0; i < idx.size(); ++i) ds.labels[idx[i]] = flipped[i];
    return ds;
}

ALResult run_one_seed(const Dataset& base, const MLPSpec& model, const ALConfig& acfg,
                      const TrainConfig& tcfg, double noise_p, std::uint64_t seed, bool timing) {
    if (noise_p > 0.0) {
        const Dataset noisy = with_label_noise(base, noise_p, mix_seed(seed, rng_tag("noise")));
        return run_active_learning(noisy, model, acfg, tcfg, seed, timing);
    }
    return run_active_learning(base, model, acfg, tcfg, seed, timing);
}

const char* kRecordHeader = "seed,cycle,labeled_frac,sampler,semi,test_acc,mean_cod,"
                            "mean_true_loss,seconds\n";

std::string record_row(std::uint64_t seed, const CycleRecord& r, const ALConfig& acfg) {
    std::string row = std::to_string(seed);
    row += ',' + std::to_string(r.cycle);
    row += ',' + fmt_double(r.labeled_frac);
    row += ',' + sampler_name(acfg.sampler);
    row += acfg.semi_enabled ? ",1" : ",0";
    row += ',' + fmt_double(r.test_acc);
    row += ',' + fmt_double(r.mean_cod);
    row += ',' + fmt_double(r.mean_true_loss);
    row += ',' + fmt_double(r.seconds);
    row += '\n';
    return row;
}

json record_json(std::uint64_t seed, const CycleRecord& r, const ALConfig& acfg) {
    json j;
    j["seed"] = seed;
    j["cycle"] = r.cycle;
    j["labeled_frac"] = r.labeled_frac;
    j["sampler"] = sampler_name(acfg.sampler);
    j["semi"] = acfg.semi_enabled;
    j["test_acc"] = r.test_acc;
    j["per_class_acc"] = r.per_class_acc;
    j["mean_train_loss"] = r.mean_train_loss;
    j["mean_cod"] = r.mean_cod;
    j["mean_true_loss"] = r.mean_true_loss;
    j["seconds"] = r.seconds;
    return j;
}

json quality_json(std::uint64_t seed, int cycle, const QualityReport& q) {
    json j;
    j["seed"] = seed;
    j["cycle"] = cycle;
    j["spearman_rho"] = q.spearman_rho;
    j["decile_mean_losses"] = q.decile_mean_losses;
    json rec = json::array();
    for (const auto& [p, r] : q.recall_at_p) rec.push_back(json::array({p, r}));
    j["recall_at_p"] = rec;
    return j;
}

// One aggregate statistic (mean or population std across seeds) of the
// numeric cycle metrics. Summation order = the order runs are passed in, so
// writer and reader agree bit for bit.
struct CycleAgg {
    int cycle = 0;
    Stats labeled_frac, test_acc, mean_cod, mean_true_loss;
};

std::vector<CycleAgg> aggregate_cycles(const std::vector<std::vector<CycleRecord>>& runs) {
    std::vector<CycleAgg> out;
    if (runs.empty()) return out;
    const std::size_t cycles = runs.front().size();
    for (const auto& r : runs)
        if (r.size() != cycles)
            throw std::runtime_error("aggregate: runs disagree on the number of cycles");
    for (std::size_t c = 0; c < cycles; ++c) {
        CycleAgg agg;
        agg.cycle = runs.front()[c].cycle;
        std::vector<double> lf, acc, cod, tl;
        for (const auto& r : runs) {
            lf.push_back(r[c].labeled_frac);
            acc.push_back(r[c].test_acc);
            cod.push_back(r[c].mean_cod);
            tl.push_back(r[c].mean_true_loss);
        }
        agg.labeled_frac = stats(lf);
        agg.test_acc = stats(acc);
        agg.mean_cod = stats(cod);
        agg.mean_true_loss = stats(tl);
        out.push_back(agg);
    }
    return out;
}

std::string aggregate_csv(const std::vector<CycleAgg>& aggs) {
    std::string out = "cycle,stat,labeled_frac,test_acc,mean_cod,mean_true_loss\n";
    for (const CycleAgg& a : aggs) {
        out += std::to_string(a.cycle) + ",mean," + fmt_double(a.labeled_frac.mean) + ',' +
               fmt_double(a.test_acc.mean) + ',' + fmt_double(a.mean_cod.mean) + ',' +
               fmt_double(a.mean_true_loss.mean) + '\n';
        out += std::to_string(a.cycle) + ",std," + fmt_double(a.labeled_frac.stddev) + ',' +
               fmt_double(a.test_acc.stddev) + ',' + fmt_double(a.mean_cod.stddev) + ',' +
               fmt_double(a.mean_true_loss.stddev) + '\n';
    }
    return out;
}

void write_status(const fs::path& dir, const std::string& command,
                  const std::vector<std::uint64_t>& seeds,
                  const std::vector<std::uint64_t>& completed, const std::string& error) {
    json j;
    j["command"] = command;
    j["status"] = completed.size() == seeds.size() ? "ok" : "partial";
    j["seeds"] = seeds;
    j["completed"] = completed;
    j["error"] = error;
    write_file_atomic(dir / "run_status.json", j.dump(2) + "\n");
}

// Writes per-seed artifacts + shared files for whichever seeds succeeded,
// then the status file; rethrows the first failure if any.
void finish_run_family(const fs::path& dir, const std::string& command,
                       const ExperimentConfig& cfg, const std::vector<ALResult>& results,
                       const std::vector<std::exception_ptr>& errors, bool write_checkpoints) {
    std::vector<std::uint64_t> completed;
    std::string first_error;
    std::string records_jsonl, quality_jsonl;
    std::vector<std::vector<CycleRecord>> ok_runs;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        if (errors[i]) {
            if (first_error.empty()) first_error = detail::describe(errors[i]);
            continue;
        }
        const std::uint64_t seed = cfg.seeds[i];
        const ALResult& res = results[i];
        completed.push_back(seed);
        ok_runs.push_back(res.records);
        std::string csv = kRecordHeader;
        for (const CycleRecord& r : res.records) csv += record_row(seed, r, cfg.active);
        write_file_atomic(dir / ("seed_" + std::to_string(seed) + ".csv"), csv);
        if (write_checkpoints)
            save_checkpoint(dir / ("final_" + std::to_string(seed) + ".ckpt"), cfg.model,
                            res.final_params);
        for (const CycleRecord& r : res.records)
            records_jsonl += record_json(seed, r, cfg.active).dump() + "\n";
        for (std::size_t c = 0; c < res.qualities.size(); ++c)
            quality_jsonl +=
                quality_json(seed, res.records[c].cycle, res.qualities[c]).dump() + "\n";
    }
    if (!ok_runs.empty()) {
        write_file_atomic(dir / "records.jsonl", records_jsonl);
        write_file_atomic(dir / "quality.jsonl", quality_jsonl);
        write_file_atomic(dir / "aggregate.csv", aggregate_csv(aggregate_cycles(ok_runs)));
    }
    write_status(dir, command, cfg.seeds, completed, first_error);
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

double final_acc(const ALResult& r) { return r.records.back().test_acc; }

}  // namespace

int cmd_al_run(const ExperimentConfig& cfg, const CliCommon& common) {
    fs::create_directories(cfg.output_dir);
    const Dataset ds = make_dataset(cfg.dataset);
    std::vector<ALResult> results(cfg.seeds.size());
    const auto errors = detail::parallel_map(cfg.seeds.size(), common.jobs, [&](std::size_t i) {
        results[i] = run_one_seed(ds, cfg.model, cfg.active, cfg.train, cfg.noise_p, cfg.seeds[i],
                                  common.timing);
    });
    finish_run_family(cfg.output_dir, "al run", cfg, results, errors, /*write_checkpoints=*/true);
    return kExitOk;
}

int cmd_al_compare(const ExperimentConfig& cfg, const CliCommon& common,
                   const std::vector<std::string>& sampler_names) {
    std::vector<Sampler> samplers;
    for (const std::string& name : sampler_names) {
        const Sampler s = parse_sampler(name);
        if (std::find(samplers.begin(), samplers.end(), s) == samplers.end())
            samplers.push_back(s);
    }
    if (samplers.empty()) throw std::invalid_argument("compare: no samplers given");
    // Random is the reference arm of every comparison, so it always runs.
    if (std::find(samplers.begin(), samplers.end(), Sampler::random) == samplers.end())
        samplers.push_back(Sampler::random);

    fs::create_directories(cfg.output_dir);
    const Dataset ds = make_dataset(cfg.dataset);
    const std::size_t ns = cfg.seeds.size();
    std::vector<ALResult> results(samplers.size() * ns);
    const auto errors =
        detail::parallel_map(results.size(), common.jobs, [&](std::size_t t) {
            ALConfig acfg = cfg.active;
            acfg.sampler = samplers[t / ns];
            results[t] = run_one_seed(ds, cfg.model, acfg, cfg.train, cfg.noise_p,
                                      cfg.seeds[t % ns], common.timing);
        });

    std::string first_error;
    for (const std::exception_ptr& e : errors)
        if (e && first_error.empty()) first_error = detail::describe(e);

    std::string raw = "sampler,seed,cycle,labeled_frac,test_acc,mean_cod,mean_true_loss,seconds\n";
    std::string agg = "sampler,cycle,stat,labeled_frac,test_acc\n";
    std::string winrate = "sampler,wins,ties,losses,mean_final_acc\n";
    std::set<std::uint64_t> completed_set(cfg.seeds.begin(), cfg.seeds.end());
    const std::size_t random_idx = static_cast<std::size_t>(
        std::find(samplers.begin(), samplers.end(), Sampler::random) - samplers.begin());
    for (std::size_t si = 0; si < samplers.size(); ++si) {
        const std::string name = sampler_name(samplers[si]);
        std::vector<std::vector<CycleRecord>> runs;
        std::vector<double> finals;
        int wins = 0, ties = 0, losses = 0;
        bool paired = true;
        for (std::size_t k = 0; k < ns; ++k) {
            if (errors[si * ns + k] || errors[random_idx * ns + k]) {
                completed_set.erase(cfg.seeds[k]);
                paired = false;
                continue;
            }
            const ALResult& res = results[si * ns + k];
            runs.push_back(res.records);
            finals.push_back(final_acc(res));
            for (const CycleRecord& r : res.records) {
                raw += name + ',' + std::to_string(cfg.seeds[k]) + ',' + std::to_string(r.cycle) +
                       ',' + fmt_double(r.labeled_frac) + ',' + fmt_double(r.test_acc) + ',' +
                       fmt_double(r.mean_cod) + ',' + fmt_double(r.mean_true_loss) + ',' +
                       fmt_double(r.seconds) + '\n';
            }
            const double mine = final_acc(res);
            const double ref = final_acc(results[random_idx * ns + k]);
            if (mine > ref)
                ++wins;
            else if (mine < ref)
                ++losses;
            else
                ++ties;
        }
        for (const CycleAgg& a : aggregate_cycles(runs)) {
            agg += name + ',' + std::to_string(a.cycle) + ",mean," +
                   fmt_double(a.labeled_frac.mean) + ',' + fmt_double(a.test_acc.mean) + '\n';
            agg += name + ',' + std::to_string(a.cycle) + ",std," +
                   fmt_double(a.labeled_frac.stddev) + ',' + fmt_double(a.test_acc.stddev) + '\n';
        }
        if (paired && !finals.empty())
            winrate += name + ',' + std::to_string(wins) + ',' + std::to_string(ties) + ',' +
                       std::to_string(losses) + ',' + fmt_double(stats(finals).mean) + '\n';
    }
    write_file_atomic(cfg.output_dir / "compare_raw.csv", raw);
    write_file_atomic(cfg.output_dir / "compare.csv", agg);
    write_file_atomic(cfg.output_dir / "winrate.csv", winrate);
    write_status(cfg.output_dir, "al compare", cfg.seeds,
                 {completed_set.begin(), completed_set.end()}, first_error);
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return kExitOk;
}

namespace {

// Applies one sweep assignment to a config copy; keys were validated upfront.
void apply_axis(ExperimentConfig& cfg, const std::string& key, double value) {
    if (key == "lambda")
        cfg.active.lambda = value;
    else if (key == "alpha")
        cfg.active.alpha = value;
    else if (key == "lr")
        cfg.train.lr = value;
    else if (key == "epochs")
        cfg.train.epochs = static_cast<int>(value);
    else if (key == "batch_size")
        cfg.train.batch_size = static_cast<int>(value);
    else
        throw std::invalid_argument("sweep: unknown grid key '" + key + "'");
}

}  // namespace

int cmd_al_sweep(const ExperimentConfig& cfg, const CliCommon& common,
                 const std::vector<GridAxis>& grid) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
    static const std::set<std::string> kKeys = {"lambda", "alpha", "lr", "epochs", "batch_size"};
    std::set<std::string> seen;
    std::size_t n_cells = 1;
    for (const GridAxis& axis : grid) {
        if (!kKeys.count(axis.key))
            throw std::invalid_argument("sweep: unknown grid key '" + axis.key +
                                        "' (valid: lambda, alpha, lr, epochs, batch_size)");
        if (!seen.insert(axis.key).second)
            throw std::invalid_argument("sweep: duplicate grid key '" + axis.key + "'");
        if (axis.values.empty())
            throw std::invalid_argument("sweep: grid key '" + axis.key + "' has no values");
        if (axis.key == "epochs" || axis.key == "batch_size")
            for (double v : axis.values)
                if (v != std::floor(v) || v < 1)
                    throw std::invalid_argument("sweep: '" + axis.key +
                                                "' values must be positive integers");
        n_cells *= axis.values.size();
    }

    // Cell -> per-axis value indices, last axis fastest.
    std::vector<ExperimentConfig> cells;
    std::vector<std::vector<double>> cell_values;
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        ExperimentConfig c = cfg;
        std::vector<double> values(grid.size());
        std::size_t rem = cell;
        for (std::size_t a = grid.size(); a-- > 0;) {
            const std::size_t vi = rem % grid[a].values.size();
            rem /= grid[a].values.size();
            values[a] = grid[a].values[vi];
            apply_axis(c, grid[a].key, values[a]);
        }
        c.train.validate();
        c.active.validate();
        cells.push_back(std::move(c));
        cell_values.push_back(std::move(values));
    }

    fs::create_directories(cfg.output_dir);
    const Dataset ds = make_dataset(cfg.dataset);
    const std::size_t ns = cfg.seeds.size();
    std::vector<double> finals(n_cells * ns, 0.0);
    const auto errors = detail::parallel_map(finals.size(), common.jobs, [&](std::size_t t) {
        const ExperimentConfig& c = cells[t / ns];
        finals[t] = final_acc(run_one_seed(ds, c.model, c.active, c.train, c.noise_p,
                                           cfg.seeds[t % ns], common.timing));
    });
    for (const std::exception_ptr& e : errors)
        if (e) {
            write_status(cfg.output_dir, "al sweep", cfg.seeds, {}, detail::describe(e));
            std::rethrow_exception(e);
        }

    std::string csv;
    for (const GridAxis& axis : grid) csv += axis.key + ',';
    csv += "mean_final_acc,std_final_acc,n_seeds\n";
    std::size_t best = 0;
    std::vector<Stats> cell_stats(n_cells);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        std::vector<double> accs(finals.begin() + static_cast<std::ptrdiff_t>(cell * ns),
                                 finals.begin() + static_cast<std::ptrdiff_t>((cell + 1) * ns));
        cell_stats[cell] = stats(accs);
        for (double v : cell_values[cell]) csv += fmt_double(v) + ',';
        csv += fmt_double(cell_stats[cell].mean) + ',' + fmt_double(cell_stats[cell].stddev) +
               ',' + std::to_string(ns) + '\n';
        if (cell_stats[cell].mean > cell_stats[best].mean) best = cell;
    }
    write_file_atomic(cfg.output_dir / "sweep.csv", csv);

    json best_doc;
    for (std::size_t a = 0; a < grid.size(); ++a) best_doc["cell"][grid[a].key] = cell_values[best][a];
    best_doc["mean_final_acc"] = cell_stats[best].mean;
    best_doc["std_final_acc"] = cell_stats[best].stddev;
    best_doc["n_seeds"] = ns;
    write_file_atomic(cfg.output_dir / "sweep_best.json", best_doc.dump(2) + "\n");
    write_status(cfg.output_dir, "al sweep", cfg.seeds, cfg.seeds, "");
    return kExitOk;
}

namespace {

std::vector<json> read_jsonl(const fs::path& path) {
    std::vector<json> out;
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw format_error(path.string() + ':' + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

double jnum(const json& j, const char* key, const fs::path& ctx) {
    if (!j.contains(key) || !j[key].is_number())
        throw format_error(ctx.string() + ": missing numeric field '" + std::string(key) + "'");
    return j[key].get<double>();
}

}  // namespace

int cmd_report(const fs::path& input_dir, const fs::path& output_dir) {
    const fs::path records_path = input_dir / "records.jsonl";
    const fs::path quality_path = input_dir / "quality.jsonl";
    std::string missing;
    for (const fs::path& p : {records_path, quality_path})
        if (!fs::exists(p)) missing += (missing.empty() ? "" : ", ") + p.string();
    if (!missing.empty())
        throw std::invalid_argument("report: missing required inputs: " + missing);

    const std::vector<json> records = read_jsonl(records_path);
    const std::vector<json> qualities = read_jsonl(quality_path);
    if (records.empty()) throw format_error(records_path.string() + ": no records");

    // Group cycle records per seed in file order (= the order the run wrote,
    // so recomputed aggregates match the run's bit for bit).
    std::vector<std::uint64_t> seed_order;
    std::map<std::uint64_t, std::vector<CycleRecord>> by_seed;
    std::map<std::uint64_t, std::vector<std::vector<double>>> class_acc;
    for (const json& j : records) {
        const auto seed = j.at("seed").get<std::uint64_t>();
        if (!by_seed.count(seed)) seed_order.push_back(seed);
        CycleRecord r;
        r.cycle = static_cast<int>(jnum(j, "cycle", records_path));
        r.labeled_frac = jnum(j, "labeled_frac", records_path);
        r.test_acc = jnum(j, "test_acc", records_path);
        r.mean_cod = jnum(j, "mean_cod", records_path);
        r.mean_true_loss = jnum(j, "mean_true_loss", records_path);
        by_seed[seed].push_back(r);
        class_acc[seed].push_back(j.at("per_class_acc").get<std::vector<double>>());
    }
    std::vector<std::vector<CycleRecord>> runs;
    for (std::uint64_t s : seed_order) runs.push_back(by_seed[s]);
    const std::vector<CycleAgg> aggs = aggregate_cycles(runs);

    // Cross-check against the run's own aggregate file when present.
    const fs::path agg_path = input_dir / "aggregate.csv";
    if (fs::exists(agg_path)) {
        const std::string want = aggregate_csv(aggs);
        std::istringstream have(read_text_file(agg_path)), expect(want);
        std::string hl, el;
        std::getline(have, hl);
        std::getline(expect, el);  // header
        std::size_t lineno = 1;
        while (std::getline(expect, el)) {
            ++lineno;
            if (!std::getline(have, hl))
                throw std::runtime_error("report: aggregate.csv is shorter than the records imply");
            const auto hf = split(hl, ','), ef = split(el, ',');
            if (hf.size() != ef.size() || hf[0] != ef[0] || hf[1] != ef[1])
                throw std::runtime_error("report: aggregate.csv row " + std::to_string(lineno) +
                                         " does not line up with records.jsonl");
            for (std::size_t c = 2; c < ef.size(); ++c) {
                const double a = parse_double(hf[c], "aggregate.csv");
                const double b = parse_double(ef[c], "recomputed aggregate");
                if (std::abs(a - b) > 1e-12)
                    throw std::runtime_error("report: aggregate.csv row " +
                                             std::to_string(lineno) +
                                             " disagrees with records.jsonl beyond 1e-12");
            }
        }
        if (std::getline(have, hl) && !hl.empty())
            throw std::runtime_error("report: aggregate.csv has extra rows");
    }

    fs::create_directories(output_dir);

    std::string acc = "cycle,labeled_frac,mean_test_acc,std_test_acc\n";
    for (const CycleAgg& a : aggs)
        acc += std::to_string(a.cycle) + ',' + fmt_double(a.labeled_frac.mean) + ',' +
               fmt_double(a.test_acc.mean) + ',' + fmt_double(a.test_acc.stddev) + '\n';
    write_file_atomic(output_dir / "accuracy_vs_budget.csv", acc);

    std::string deciles = "seed,cycle,decile,mean_loss\n";
    std::string recall = "seed,cycle,p,recall\n";
    for (const json& j : qualities) {
        const auto seed = std::to_string(j.at("seed").get<std::uint64_t>());
        const auto cycle = std::to_string(static_cast<int>(jnum(j, "cycle", quality_path)));
        const auto bands = j.at("decile_mean_losses").get<std::vector<double>>();
        for (std::size_t d = 0; d < bands.size(); ++d)
            deciles += seed + ',' + cycle + ',' + std::to_string(d) + ',' + fmt_double(bands[d]) +
                       '\n';
        for (const json& pr : j.at("recall_at_p"))
            recall += seed + ',' + cycle + ',' + std::to_string(pr.at(0).get<int>()) + ',' +
                      fmt_double(pr.at(1).get<double>()) + '\n';
    }
    write_file_atomic(output_dir / "cod_decile_losses.csv", deciles);
    write_file_atomic(output_dir / "recall_at_p.csv", recall);

    std::string per_class = "seed,cycle,class,acc\n";
    for (std::uint64_t s : seed_order)
        for (std::size_t c = 0; c < class_acc[s].size(); ++c)
            for (std::size_t k = 0; k < class_acc[s][c].size(); ++k)
                per_class += std::to_string(s) + ',' + std::to_string(by_seed[s][c].cycle) + ',' +
                             std::to_string(k) + ',' + fmt_double(class_acc[s][c][k]) + '\n';
    write_file_atomic(output_dir / "per_class_accuracy.csv", per_class);

    std::string summary;
    summary += "seeds: " + std::to_string(seed_order.size()) + "\n";
    summary += "cycles: " + std::to_string(runs.front().size()) + "\n";
    summary += "sampler: " + records.front().at("sampler").get<std::string>() + "\n";
    summary += "semi: " + std::string(records.front().at("semi").get<bool>() ? "on" : "off") + "\n";
    const CycleAgg& last = aggs.back();
    summary += "final labeled_frac: " + fmt_double(last.labeled_frac.mean) + "\n";
    summary += "final test_acc: " + fmt_double(last.test_acc.mean) + " +/- " +
               fmt_double(last.test_acc.stddev) + "\n";
    summary += "final mean_cod: " + fmt_double(last.mean_cod.mean) + "\n";
    summary += "final mean_true_loss: " + fmt_double(last.mean_true_loss.mean) + "\n";
    if (!qualities.empty()) {
        std::vector<double> rhos;
        const int last_cycle = runs.front().back().cycle;
        for (const json& j : qualities)
            if (static_cast<int>(jnum(j, "cycle", quality_path)) == last_cycle)
                rhos.push_back(jnum(j, "spearman_rho", quality_path));
        if (!rhos.empty())
            summary += "final spearman(score, true loss): " + fmt_double(stats(rhos).mean) + "\n";
    }
    write_file_atomic(output_dir / "summary.txt", summary);
    return kExitOk;
}

}  // namespace todlab
