#include <cstdio>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "todlab/experiment.hpp"
#include "todlab/io_util.hpp"

namespace {

using namespace todlab;

// Common flags shared by the config-driven commands, plus the overrides that
// can be applied on top of the config file (flags win over the file; the
// TODLAB_OUTPUT_DIR environment variable sits between the two).
struct CommonOpts {
    std::string config;
    std::string output_dir;
    CLI::Option* output_dir_opt = nullptr;
    CliCommon common;

    std::vector<std::uint64_t> seeds;
    CLI::Option* seeds_opt = nullptr;
    std::string sampler;
    CLI::Option* sampler_opt = nullptr;
    bool semi = false;
    CLI::Option* semi_opt = nullptr;
    double lambda = 0.0;
    CLI::Option* lambda_opt = nullptr;
    double noise_p = 0.0;
    CLI::Option* noise_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_overrides = true) {
    cmd->add_option("--config", o.config, "experiment config (JSON)")->required();
    o.output_dir_opt = cmd->add_option("--output-dir", o.output_dir,
                                       "output directory (overrides config and "
                                       "TODLAB_OUTPUT_DIR)");
    cmd->add_option("--jobs", o.common.jobs, "max concurrent runs")->check(CLI::Range(1, 1024));
    cmd->add_flag("--timing", o.common.timing,
                  "record wall-clock seconds (breaks byte-identical reruns)");
    if (!with_overrides) return;
    o.seeds_opt = cmd->add_option("--seeds", o.seeds, "override config seeds")->delimiter(',');
    o.sampler_opt = cmd->add_option("--sampler", o.sampler, "override acquisition sampler");
    o.semi_opt = cmd->add_flag("--semi,!--no-semi", o.semi, "override semisupervised training");
    o.lambda_opt = cmd->add_option("--lambda", o.lambda, "override consistency-loss weight");
    o.noise_opt = cmd->add_option("--noise-p", o.noise_p, "override train label-noise rate");
}

ExperimentConfig load_with_overrides(const CommonOpts& o) {
    ExperimentConfig cfg = load_experiment_config(o.config);
    if (o.seeds_opt && o.seeds_opt->count()) {
        if (o.seeds.empty()) throw std::invalid_argument("--seeds: empty list");
        std::set<std::uint64_t> distinct(o.seeds.begin(), o.seeds.end());
        if (distinct.size() != o.seeds.size())
            throw std::invalid_argument("--seeds: duplicate seeds");
        cfg.seeds = o.seeds;
    }
    if (o.sampler_opt && o.sampler_opt->count()) cfg.active.sampler = parse_sampler(o.sampler);
    if (o.semi_opt && o.semi_opt->count()) cfg.active.semi_enabled = o.semi;
    if (o.lambda_opt && o.lambda_opt->count()) cfg.active.lambda = o.lambda;
    if (o.noise_opt && o.noise_opt->count()) {
        if (o.noise_p < 0.0 || o.noise_p > 1.0)
            throw std::invalid_argument("--noise-p: must be in [0,1]");
        cfg.noise_p = o.noise_p;
    }
    cfg.active.validate();
    if (const char* env = std::getenv("TODLAB_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (o.output_dir_opt && o.output_dir_opt->count()) cfg.output_dir = o.output_dir;
    return cfg;
}

std::vector<GridAxis> parse_grid(const std::vector<std::string>& specs) {
    std::vector<GridAxis> grid;
    for (const std::string& s : specs) {
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
            throw std::invalid_argument("--grid: expected key=v1,v2,... got '" + s + "'");
        GridAxis axis;
        axis.key = s.substr(0, eq);
        for (const std::string& field : split(s.substr(eq + 1), ','))
            axis.values.push_back(parse_double(field, "--grid " + axis.key));
        grid.push_back(std::move(axis));
    }
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"todlab: temporal-output-discrepancy active-learning laboratory"};
    app.require_subcommand(1);

    CLI::App* al = app.add_subcommand("al", "active-learning experiments");
    al->require_subcommand(1);
    CommonOpts run_opts, compare_opts, sweep_opts;
    CLI::App* al_run = al->add_subcommand("run", "run the configured experiment over all seeds");
    add_common(al_run, run_opts);
    CLI::App* al_compare =
        al->add_subcommand("compare", "run several samplers on paired seeds");
    add_common(al_compare, compare_opts);
    std::vector<std::string> samplers;
    al_compare->add_option("--samplers", samplers, "samplers to compare (random is always added)")
        ->delimiter(',')
        ->required();
    CLI::App* al_sweep = al->add_subcommand("sweep", "full-factorial hyperparameter sweep");
    add_common(al_sweep, sweep_opts);
    std::vector<std::string> grid_specs;
    al_sweep->add_option("--grid", grid_specs, "axis as key=v1,v2,... (repeatable)")->required();

    CLI::App* verify = app.add_subcommand("verify", "verification harnesses");
    verify->require_subcommand(1);
    CLI::App* verify_bounds =
        verify->add_subcommand("bounds", "check the proved discrepancy bounds numerically");
    BoundsFlags bflags;
    CliCommon bcommon;
    std::string bounds_out;
    CLI::Option* bounds_out_opt =
        verify_bounds->add_option("--output-dir", bounds_out, "output directory");
    verify_bounds->add_option("--trials", bflags.trials, "random trials per check");
    verify_bounds->add_option("--eta", bflags.etas, "step sizes")->delimiter(',');
    verify_bounds->add_option("--T", bflags.Ts, "window lengths")->delimiter(',');
    verify_bounds->add_option("--slack", bflags.slack, "relative slack");
    verify_bounds->add_option("--seed", bflags.seed, "master seed");

    CLI::App* select = app.add_subcommand("select", "model selection experiments");
    select->require_subcommand(1);
    CLI::App* select_run =
        select->add_subcommand("run", "rank candidate pools without labels");
    CommonOpts select_opts;
    add_common(select_run, select_opts, /*with_overrides=*/false);
    SelectFlags sflags;
    select_run->add_option("--pool-size", sflags.pool_size, "candidates per draw");
    select_run->add_option("--gap-epochs", sflags.gap_epochs, "epochs between baseline and final");
    select_run->add_option("--methods", sflags.methods, "selection methods (default: all)")
        ->delimiter(',');
    select_run->add_option("--draws", sflags.draws, "independent pool draws");
    select_run->add_option("--seed", sflags.seed, "master seed");

    CLI::App* report = app.add_subcommand("report", "derive summary tables from run outputs");
    std::string report_input, report_out;
    report->add_option("--input", report_input, "directory written by 'al run'")->required();
    CLI::Option* report_out_opt =
        report->add_option("--output-dir", report_out, "where to write the tables (default: the "
                                                       "input directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? todlab::kExitOk : todlab::kExitUsage;
    }

    try {
        if (al_run->parsed()) return cmd_al_run(load_with_overrides(run_opts), run_opts.common);
        if (al_compare->parsed())
            return cmd_al_compare(load_with_overrides(compare_opts), compare_opts.common,
                                  samplers);
        if (al_sweep->parsed())
            return cmd_al_sweep(load_with_overrides(sweep_opts), sweep_opts.common,
                                parse_grid(grid_specs));
        if (verify_bounds->parsed()) {
            if (const char* env = std::getenv("TODLAB_OUTPUT_DIR"); env && *env)
                bflags.output_dir = env;
            if (bounds_out_opt->count()) bflags.output_dir = bounds_out;
            return cmd_verify_bounds(bflags, bcommon);
        }
        if (select_run->parsed())
            return cmd_select_run(load_with_overrides(select_opts), sflags, select_opts.common);
        if (report->parsed()) {
            std::filesystem::path out = report_input;
            if (const char* env = std::getenv("TODLAB_OUTPUT_DIR"); env && *env) out = env;
            if (report_out_opt->count()) out = report_out;
            return cmd_report(report_input, out);
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return todlab::kExitUsage;
    } catch (const todlab::format_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return todlab::kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return todlab::kExitRuntime;
    }
    return todlab::kExitUsage;
}
