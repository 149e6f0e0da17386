#include "todlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "todlab/io_util.hpp"
#include "todlab/rng.hpp"

namespace todlab {

std::vector<std::size_t> Dataset::indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) out.push_back(i);
    return out;
}

void Dataset::validate() const {
    const std::size_t n = labels.size();
    if (dim < 1 || n_classes < 1) throw std::invalid_argument("Dataset: empty dimensions");
    if (features.size() != n * static_cast<std::size_t>(dim))
        throw std::invalid_argument("Dataset: feature matrix size mismatch");
    if (split.size() != n) throw std::invalid_argument("Dataset: split tag count mismatch");
    for (double v : features)
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite feature value");
    std::vector<bool> seen_in_train(n_classes, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw std::invalid_argument("Dataset: label out of range");
        if (split[i] == Split::train) seen_in_train[labels[i]] = true;
    }
    for (int c = 0; c < n_classes; ++c)
        if (!seen_in_train[c])
            throw std::invalid_argument("Dataset: class " + std::to_string(c) +
                                        " missing from train split");
}

SplitView subset(const Dataset& ds, Split s) {
    SplitView view;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.split[i] != s) continue;
        view.orig_index.push_back(i);
        view.labels.push_back(ds.labels[i]);
        const double* row = ds.features.data() + i * ds.dim;
        view.features.insert(view.features.end(), row, row + ds.dim);
    }
    return view;
}

namespace {

// Per class: random permutation, first ~test_frac of the class goes to test,
// always keeping at least one train sample so no class vanishes from train.
std::vector<Split> stratified_split(const std::vector<int>& labels, int n_classes,
                                    double test_frac, Rng& rng) {
    if (test_frac < 0.0 || test_frac >= 1.0)
        throw std::invalid_argument("test_frac must be in [0,1)");
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::vector<Split> split(labels.size(), Split::train);
    for (auto& members : by_class) {
        rng.shuffle(members);
        std::size_t n_test =
            static_cast<std::size_t>(std::llround(test_frac * static_cast<double>(members.size())));
        if (n_test >= members.size() && !members.empty()) n_test = members.size() - 1;
        for (std::size_t k = 0; k < n_test; ++k) split[members[k]] = Split::test;
    }
    return split;
}

}  // namespace

Dataset gen_two_moons(int n, double noise_sigma, double test_frac, std::uint64_t seed) {
    if (n < 20) throw std::invalid_argument("gen_two_moons: need n >= 20");
    if (noise_sigma < 0.0) throw std::invalid_argument("gen_two_moons: negative noise");
    const int n0 = (n + 1) / 2;
    const int n1 = n / 2;

    Dataset ds;
    ds.name = "two_moons";
    ds.dim = 2;
    ds.n_classes = 2;
    ds.features.reserve(2 * n);
    ds.labels.reserve(n);

    Rng rng(mix_seed(seed, rng_tag("two_moons")));
    const auto emit = [&](int cls, int count) {
        for (int i = 0; i < count; ++i) {
            // Evenly spaced angles over the half-circle, then Gaussian jitter.
            const double t = std::numbers::pi * i / (count - 1);
            double x = (cls == 0) ? std::cos(t) : 1.0 - std::cos(t);
            double y = (cls == 0) ? std::sin(t) : 0.5 - std::sin(t);
            x += noise_sigma * rng.normal();
            y += noise_sigma * rng.normal();
            ds.features.push_back(x);
            ds.features.push_back(y);
            ds.labels.push_back(cls);
        }
    };
    emit(0, n0);
    emit(1, n1);

    Rng split_rng(mix_seed(seed, rng_tag("split")));
    ds.split = stratified_split(ds.labels, ds.n_classes, test_frac, split_rng);
    ds.metadata = {{"generator", "two_moons"},
                   {"n", n},
                   {"noise_sigma", noise_sigma},
                   {"test_frac", test_frac},
                   {"seed", seed}};
    ds.validate();
    return ds;
}

Dataset gen_blobs(int n, int k_classes, int d, double centers_scale, double sigma,
                  double test_frac, std::uint64_t seed) {
    if (k_classes < 2) throw std::invalid_argument("gen_blobs: need k_classes >= 2");
    if (d < 2) throw std::invalid_argument("gen_blobs: need d >= 2");
    if (n < 2 * k_classes) throw std::invalid_argument("gen_blobs: need n >= 2*k_classes");
    if (sigma < 0.0 || centers_scale <= 0.0)
        throw std::invalid_argument("gen_blobs: bad sigma/centers_scale");

    Rng rng(mix_seed(seed, rng_tag("blobs")));
    std::vector<double> centers(static_cast<std::size_t>(k_classes) * d);
    for (double& c : centers) c = rng.uniform(-centers_scale, centers_scale);

    Dataset ds;
    ds.name = "blobs";
    ds.dim = d;
    ds.n_classes = k_classes;
    const int base = n / k_classes;
    const int rem = n % k_classes;
    for (int cls = 0; cls < k_classes; ++cls) {
        const int count = base + (cls < rem ? 1 : 0);
        for (int i = 0; i < count; ++i) {
            for (int j = 0; j < d; ++j)
                ds.features.push_back(centers[static_cast<std::size_t>(cls) * d + j] +
                                      sigma * rng.normal());
            ds.labels.push_back(cls);
        }
    }

    // Nearest-center oracle accuracy = a Bayes-rate estimate for this draw.
    std::size_t oracle_hits = 0;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        int best = 0;
        double best_d2 = 0.0;
        for (int cls = 0; cls < k_classes; ++cls) {
            double d2 = 0.0;
            for (int j = 0; j < d; ++j) {
                const double diff = ds.features[i * d + j] - centers[static_cast<std::size_t>(cls) * d + j];
                d2 += diff * diff;
            }
            if (cls == 0 || d2 < best_d2) {
                best = cls;
                best_d2 = d2;
            }
        }
        if (best == ds.labels[i]) ++oracle_hits;
    }

    Rng split_rng(mix_seed(seed, rng_tag("split")));
    ds.split = stratified_split(ds.labels, ds.n_classes, test_frac, split_rng);
    ds.metadata = {{"generator", "blobs"},
                   {"n", n},
                   {"k_classes", k_classes},
                   {"d", d},
                   {"centers_scale", centers_scale},
                   {"sigma", sigma},
                   {"test_frac", test_frac},
                   {"seed", seed},
                   {"centers", centers},
                   {"nearest_center_oracle_acc",
                    static_cast<double>(oracle_hits) / static_cast<double>(ds.labels.size())}};
    ds.validate();
    return ds;
}

namespace {

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines = split(text, '\n');
    for (std::string& line : lines)
        if (!line.empty() && line.back() == '\r') line.pop_back();
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvLoadOptions& opt) {
    const std::vector<std::string> lines = csv_lines(read_text_file(path));
    if (lines.size() < 2) throw format_error(path.string() + ": need a header and at least one row");

    const std::vector<std::string> header = split(lines[0], ',');
    int label_col = -1, split_col = -1;
    std::vector<int> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == opt.label_column)
            label_col = static_cast<int>(c);
        else if (opt.split_column && header[c] == *opt.split_column)
            split_col = static_cast<int>(c);
        else
            feature_cols.push_back(static_cast<int>(c));
    }
    if (label_col < 0)
        throw format_error(path.string() + ": label column '" + opt.label_column + "' not found");
    if (opt.split_column && split_col < 0)
        throw format_error(path.string() + ": split column '" + *opt.split_column + "' not found");
    if (feature_cols.empty()) throw format_error(path.string() + ": no feature columns");

    Dataset ds;
    ds.name = path.stem().string();
    ds.dim = static_cast<int>(feature_cols.size());
    int max_label = -1;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::string context = path.string() + ": line " + std::to_string(r + 1);
        const std::vector<std::string> fields = split(lines[r], ',');
        if (fields.size() != header.size())
            throw format_error(context + ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
        for (int c : feature_cols) ds.features.push_back(parse_double(fields[c], context));
        const double raw_label = parse_double(fields[label_col], context);
        if (raw_label < 0.0 || raw_label != std::floor(raw_label))
            throw format_error(context + ": label must be a nonnegative integer, got '" +
                               fields[label_col] + "'");
        const int label = static_cast<int>(raw_label);
        ds.labels.push_back(label);
        max_label = std::max(max_label, label);
        if (split_col >= 0) {
            if (fields[split_col] == "train")
                ds.split.push_back(Split::train);
            else if (fields[split_col] == "test")
                ds.split.push_back(Split::test);
            else
                throw format_error(context + ": split must be 'train' or 'test', got '" +
                                   fields[split_col] + "'");
        }
    }
    ds.n_classes = max_label + 1;
    if (split_col < 0) {
        Rng split_rng(mix_seed(opt.seed, rng_tag("split")));
        ds.split = stratified_split(ds.labels, ds.n_classes, opt.test_frac, split_rng);
    }

    ds.metadata = {{"source", path.string()},
                   {"label_column", opt.label_column},
                   {"normalize", opt.normalize}};
    if (opt.normalize) {
        // Standardize with train-split statistics only (population std);
        // constant columns stay untouched and record sigma = 0.
        const std::vector<std::size_t> train_rows = ds.indices(Split::train);
        if (train_rows.empty()) throw format_error(path.string() + ": empty train split");
        std::vector<double> mu(ds.dim, 0.0), sigma(ds.dim, 0.0);
        for (std::size_t i : train_rows)
            for (int j = 0; j < ds.dim; ++j) mu[j] += ds.features[i * ds.dim + j];
        for (int j = 0; j < ds.dim; ++j) mu[j] /= static_cast<double>(train_rows.size());
        for (std::size_t i : train_rows)
            for (int j = 0; j < ds.dim; ++j) {
                const double d = ds.features[i * ds.dim + j] - mu[j];
                sigma[j] += d * d;
            }
        for (int j = 0; j < ds.dim; ++j)
            sigma[j] = std::sqrt(sigma[j] / static_cast<double>(train_rows.size()));
        for (std::size_t i = 0; i < ds.size(); ++i)
            for (int j = 0; j < ds.dim; ++j)
                if (sigma[j] > 0.0)
                    ds.features[i * ds.dim + j] = (ds.features[i * ds.dim + j] - mu[j]) / sigma[j];
        ds.metadata["train_mean"] = mu;
        ds.metadata["train_std"] = sigma;
    }
    ds.validate();
    return ds;
}

void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
    ds.validate();
    std::string out;
    for (int j = 0; j < ds.dim; ++j) out += "f" + std::to_string(j) + ",";
    out += "label,split\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (int j = 0; j < ds.dim; ++j) {
            out += fmt_double(ds.features[i * ds.dim + j]);
            out += ',';
        }
        out += std::to_string(ds.labels[i]);
        out += (ds.split[i] == Split::train) ? ",train\n" : ",test\n";
    }
    write_file_atomic(path, out);
    write_file_atomic(path.string() + ".meta.json", ds.metadata.dump(2) + "\n");
}

}  // namespace todlab
