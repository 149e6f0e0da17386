#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace todlab {

enum class Split : unsigned char { train, test };

struct Dataset {
    std::string name;
    int dim = 0;
    int n_classes = 0;
    std::vector<double> features;  // n x dim row-major
    std::vector<int> labels;       // class ids in [0, n_classes)
    std::vector<Split> split;
    nlohmann::json metadata;  // generator params or source path

    std::size_t size() const { return labels.size(); }
    std::vector<std::size_t> indices(Split s) const;

    // Throws std::invalid_argument on inconsistent sizes, labels out of
    // range, non-finite features, or a class missing from the train split.
    void validate() const;
};

// Contiguous copy of one split, remembering original row numbers.
struct SplitView {
    std::vector<double> features;
    std::vector<int> labels;
    std::vector<std::size_t> orig_index;
    std::size_t size() const { return labels.size(); }
};

SplitView subset(const Dataset& ds, Split s);

// Two interleaved noisy half-circles: class 0 on the unit circle at the
// origin, class 1 on the unit circle at (1, 0.5), mirrored. Stratified
// train/test split; fully determined by the arguments.
Dataset gen_two_moons(int n, double noise_sigma, double test_frac, std::uint64_t seed);

// K isotropic Gaussian clusters with centers drawn uniformly in
// [-centers_scale, centers_scale]^d. Metadata records the centers and the
// nearest-center oracle accuracy (a Bayes-rate estimate).
Dataset gen_blobs(int n, int k_classes, int d, double centers_scale, double sigma,
                  double test_frac, std::uint64_t seed);

struct CsvLoadOptions {
    std::string label_column;
    // Either take the split from a column with values train/test ...
    std::optional<std::string> split_column;
    // ... or draw a stratified split with this test fraction and seed.
    double test_frac = 0.2;
    std::uint64_t seed = 0;
    // Standardize each feature dimension using train-split statistics;
    // constant columns are left untouched.
    bool normalize = false;
};

// Rectangular numeric CSV with a header row. Errors name the line number.
Dataset load_csv(const std::filesystem::path& path, const CsvLoadOptions& opt);

// Writes <path> (features, label, split columns; exact round-trip numbers)
// and a <path>.meta.json sidecar. Both writes are atomic.
void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace todlab
