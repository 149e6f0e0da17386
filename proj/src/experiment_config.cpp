#include <set>

#include "todlab/experiment.hpp"
#include "todlab/io_util.hpp"

namespace todlab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
}

double get_num(const json& obj, const std::string& path, const char* key, double def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number_integer()) fail(path + "." + key, "expected an integer");
    return obj[key].get<int>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_boolean()) fail(path + "." + key, "expected a boolean");
    return obj[key].get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const char* key,
                    const std::string& def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_string()) fail(path + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

std::uint64_t get_seed(const json& obj, const std::string& path, const char* key,
                       std::uint64_t def) {
    if (!obj.contains(key)) return def;
    if (!obj[key].is_number_integer() || obj[key].is_number_float() ||
        (obj[key].is_number_integer() && obj[key].get<long long>() < 0))
        fail(path + "." + key, "expected a nonnegative integer");
    return obj[key].get<std::uint64_t>();
}

void check_dataset_section(const json& ds) {
    const std::string path = "dataset";
    if (!ds.is_object()) fail(path, "expected an object");
    const std::string kind = get_str(ds, path, "kind", "");
    if (kind == "two_moons") {
        check_keys(ds, path, {"kind", "n", "noise_sigma", "test_frac", "seed"});
    } else if (kind == "blobs") {
        check_keys(ds, path,
                   {"kind", "n", "k_classes", "d", "centers_scale", "sigma", "test_frac", "seed"});
    } else if (kind == "csv") {
        check_keys(ds, path,
                   {"kind", "path", "label_column", "split_column", "test_frac", "normalize",
                    "seed"});
        if (get_str(ds, path, "path", "").empty()) fail(path + ".path", "required");
        if (get_str(ds, path, "label_column", "").empty()) fail(path + ".label_column", "required");
    } else {
        fail(path + ".kind", "must be one of: two_moons, blobs, csv");
    }
}

}  // namespace

Dataset make_dataset(const json& ds) {
    check_dataset_section(ds);
    const std::string path = "dataset";
    const std::string kind = ds["kind"].get<std::string>();
    if (kind == "two_moons")
        return gen_two_moons(get_int(ds, path, "n", 1000), get_num(ds, path, "noise_sigma", 0.2),
                             get_num(ds, path, "test_frac", 0.25), get_seed(ds, path, "seed", 1));
    if (kind == "blobs")
        return gen_blobs(get_int(ds, path, "n", 1000), get_int(ds, path, "k_classes", 5),
                         get_int(ds, path, "d", 2), get_num(ds, path, "centers_scale", 4.0),
                         get_num(ds, path, "sigma", 0.6), get_num(ds, path, "test_frac", 0.25),
                         get_seed(ds, path, "seed", 1));
    CsvLoadOptions opt;
    opt.label_column = get_str(ds, path, "label_column", "");
    const std::string split_col = get_str(ds, path, "split_column", "");
    if (!split_col.empty()) opt.split_column = split_col;
    opt.test_frac = get_num(ds, path, "test_frac", 0.2);
    opt.normalize = get_bool(ds, path, "normalize", false);
    opt.seed = get_seed(ds, path, "seed", 1);
    return load_csv(get_str(ds, path, "path", ""), opt);
}

ExperimentConfig parse_experiment_config(const json& doc) {
    check_keys(doc, "(top level)",
               {"dataset", "model", "train", "active", "noise", "seeds", "output_dir"});
    if (!doc.contains("dataset")) fail("dataset", "required section");
    if (!doc.contains("model")) fail("model", "required section");
    if (!doc.contains("seeds")) fail("seeds", "required section");

    ExperimentConfig cfg;
    cfg.dataset = doc["dataset"];
    check_dataset_section(cfg.dataset);

    const json& model = doc["model"];
    check_keys(model, "model", {"layer_sizes"});
    if (!model.contains("layer_sizes") || !model["layer_sizes"].is_array())
        fail("model.layer_sizes", "expected an array of integers");
    for (const json& v : model["layer_sizes"]) {
        if (!v.is_number_integer()) fail("model.layer_sizes", "expected an array of integers");
        cfg.model.layer_sizes.push_back(v.get<int>());
    }
    cfg.model.validate();

    if (doc.contains("train")) {
        const json& t = doc["train"];
        const std::string path = "train";
        check_keys(t, path,
                   {"lr", "momentum", "weight_decay", "batch_size", "epochs", "lr_drop_factor",
                    "lr_drop_at_frac"});
        cfg.train.lr = get_num(t, path, "lr", cfg.train.lr);
        cfg.train.momentum = get_num(t, path, "momentum", cfg.train.momentum);
        cfg.train.weight_decay = get_num(t, path, "weight_decay", cfg.train.weight_decay);
        cfg.train.batch_size = get_int(t, path, "batch_size", cfg.train.batch_size);
        cfg.train.epochs = get_int(t, path, "epochs", cfg.train.epochs);
        cfg.train.lr_drop_factor = get_num(t, path, "lr_drop_factor", cfg.train.lr_drop_factor);
        cfg.train.lr_drop_at_frac = get_num(t, path, "lr_drop_at_frac", cfg.train.lr_drop_at_frac);
    }
    cfg.train.validate();

    if (doc.contains("active")) {
        const json& a = doc["active"];
        const std::string path = "active";
        check_keys(a, path,
                   {"start_frac", "budget_frac", "cycles", "sampler", "semi_enabled", "lambda",
                    "alpha", "unlabeled_batch_size", "output_space"});
        cfg.active.start_frac = get_num(a, path, "start_frac", cfg.active.start_frac);
        cfg.active.budget_frac = get_num(a, path, "budget_frac", cfg.active.budget_frac);
        cfg.active.cycles = get_int(a, path, "cycles", cfg.active.cycles);
        const std::string sampler = get_str(a, path, "sampler", sampler_name(cfg.active.sampler));
        cfg.active.sampler = parse_sampler(sampler);
        cfg.active.semi_enabled = get_bool(a, path, "semi_enabled", cfg.active.semi_enabled);
        cfg.active.lambda = get_num(a, path, "lambda", cfg.active.lambda);
        cfg.active.alpha = get_num(a, path, "alpha", cfg.active.alpha);
        cfg.active.unlabeled_batch_size =
            get_int(a, path, "unlabeled_batch_size", cfg.active.unlabeled_batch_size);
        const std::string space = get_str(a, path, "output_space", "probs");
        if (space == "probs")
            cfg.active.output_space = OutputSpace::probs;
        else if (space == "logits")
            cfg.active.output_space = OutputSpace::logits;
        else
            fail("active.output_space", "must be 'probs' or 'logits'");
    }
    cfg.active.validate();

    if (doc.contains("noise")) {
        check_keys(doc["noise"], "noise", {"p"});
        cfg.noise_p = get_num(doc["noise"], "noise", "p", 0.0);
        if (cfg.noise_p < 0.0 || cfg.noise_p > 1.0) fail("noise.p", "must be in [0,1]");
    }

    const json& seeds = doc["seeds"];
    if (!seeds.is_array() || seeds.empty()) fail("seeds", "expected a nonempty array of integers");
    std::set<std::uint64_t> seen;
    for (const json& s : seeds) {
        if (!s.is_number_integer() || s.get<long long>() < 0)
            fail("seeds", "expected nonnegative integers");
        const std::uint64_t v = s.get<std::uint64_t>();
        if (!seen.insert(v).second) fail("seeds", "duplicate seed " + std::to_string(v));
        cfg.seeds.push_back(v);
    }

    cfg.output_dir = get_str(doc, "(top level)", "output_dir", "out");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: " + path.string() + ": " + e.what());
    }
    return parse_experiment_config(doc);
}

}  // namespace todlab
