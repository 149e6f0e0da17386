#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "todlab/active_loop.hpp"
#include "todlab/dataset.hpp"

namespace todlab {

// Parsed and validated experiment description (strict schema: unknown keys
// anywhere are rejected with their JSON path).
struct ExperimentConfig {
    nlohmann::json dataset;  // validated; consumed by make_dataset
    MLPSpec model;
    TrainConfig train;
    ALConfig active;
    double noise_p = 0.0;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output_dir = "out";
};

ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Builds the dataset described by a config's dataset section
// (kind: two_moons | blobs | csv).
Dataset make_dataset(const nlohmann::json& dataset_cfg);

// Options shared by all commands.
struct CliCommon {
    int jobs = 1;        // max concurrent (seed / grid-cell) runs
    bool timing = false; // fill wall-clock fields (off: deterministic zeros)
};

// One full-factorial sweep axis: config key + values.
struct GridAxis {
    std::string key;  // lambda | alpha | lr | epochs | batch_size
    std::vector<double> values;
};

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitThreshold = 3;

int cmd_al_run(const ExperimentConfig& cfg, const CliCommon& common);
int cmd_al_compare(const ExperimentConfig& cfg, const CliCommon& common,
                   const std::vector<std::string>& samplers);
int cmd_al_sweep(const ExperimentConfig& cfg, const CliCommon& common,
                 const std::vector<GridAxis>& grid);

struct BoundsFlags {
    int trials = 100;
    std::vector<double> etas = {1e-2, 1e-3, 1e-4};
    std::vector<int> Ts = {1, 10, 50};
    double slack = 0.05;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
};

int cmd_verify_bounds(const BoundsFlags& flags, const CliCommon& common);

struct SelectFlags {
    int pool_size = 10;
    int gap_epochs = 1;
    std::vector<std::string> methods;  // empty = all
    int draws = 20;
    std::uint64_t seed = 1;
};

int cmd_select_run(const ExperimentConfig& cfg, const SelectFlags& flags,
                   const CliCommon& common);

int cmd_report(const std::filesystem::path& input_dir, const std::filesystem::path& output_dir);

}  // namespace todlab
