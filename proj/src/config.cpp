#include "psb/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace psb {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

// Tracks which keys of one JSON object were consumed; anything left over at
// finish() is an unknown key. Keeps misspellings from silently reverting a
// field to its default.
class Section {
public:
    Section(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) fail(path_, "expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    const Json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    std::string key_path(const std::string& key) const { return path_ + "." + key; }

    double number(const std::string& key, double def) {
        if (!has(key)) return def;
        const Json& v = obj_.at(key);
        if (!v.is_number()) fail(key_path(key), "expected a number");
        return v.get<double>();
    }

    long integer(const std::string& key, long def) {
        if (!has(key)) return def;
        const Json& v = obj_.at(key);
        if (!v.is_number_integer()) fail(key_path(key), "expected an integer");
        return v.get<long>();
    }

    std::uint64_t uinteger(const std::string& key, std::uint64_t def) {
        if (!has(key)) return def;
        const Json& v = obj_.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
        fail(key_path(key), "expected a nonnegative integer");
    }

    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const Json& v = obj_.at(key);
        if (!v.is_boolean()) fail(key_path(key), "expected a boolean");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const Json& v = obj_.at(key);
        if (!v.is_string()) fail(key_path(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<std::string> string_list(const std::string& key, std::vector<std::string> def) {
        if (!has(key)) return def;
        const Json& v = obj_.at(key);
        if (!v.is_array()) fail(key_path(key), "expected an array of strings");
        std::vector<std::string> out;
        for (const auto& item : v) {
            if (!item.is_string()) fail(key_path(key), "expected an array of strings");
            out.push_back(item.get<std::string>());
        }
        return out;
    }

    std::map<std::string, double> number_map(const std::string& key,
                                             std::map<std::string, double> def) {
        if (!has(key)) return def;
        const Json& v = obj_.at(key);
        if (!v.is_object()) fail(key_path(key), "expected an object of numbers");
        std::map<std::string, double> out;
        for (const auto& [k, item] : v.items()) {
            if (!item.is_number()) fail(key_path(key) + "." + k, "expected a number");
            out[k] = item.get<double>();
        }
        return out;
    }

    void finish() {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.count(key)) fail(path_, "unknown key '" + key + "'");
    }

private:
    const Json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

TrainConfig parse_train(const Json& obj, const std::string& path) {
    Section s(obj, path);
    TrainConfig t;
    t.learning_rate = s.number("learning_rate", t.learning_rate);
    t.momentum = s.number("momentum", t.momentum);
    t.batch_size = static_cast<int>(s.integer("batch_size", t.batch_size));
    t.epochs_per_iteration = static_cast<int>(s.integer("epochs_per_iteration", t.epochs_per_iteration));
    t.patience = static_cast<int>(s.integer("patience", t.patience));
    s.finish();
    return t;
}

AugmentConfig parse_aug(const Json& obj, const std::string& path) {
    Section s(obj, path);
    AugmentConfig a;
    a.weak_noise_sigma = s.number("weak_noise_sigma", a.weak_noise_sigma);
    a.strong_noise_sigma = s.number("strong_noise_sigma", a.strong_noise_sigma);
    a.strong_mask_prob = s.number("strong_mask_prob", a.strong_mask_prob);
    s.finish();
    return a;
}

ThresholdPolicy parse_policy(const Json& obj, const std::string& path) {
    Section s(obj, path);
    ThresholdPolicy p;
    const std::string kind = s.text("kind", "fixed");
    if (kind == "fixed")
        p.kind = ThresholdKind::Fixed;
    else if (kind == "curriculum")
        p.kind = ThresholdKind::Curriculum;
    else
        fail(s.key_path("kind"), "expected 'fixed' or 'curriculum', got '" + kind + "'");
    p.epsilon = s.number("epsilon", p.epsilon);
    p.base_threshold = s.number("base_threshold", p.base_threshold);
    p.pseudo_balance = s.boolean("pseudo_balance", p.pseudo_balance);
    s.finish();
    return p;
}

SelfTrainConfig parse_selftrain(const Json& obj, const std::string& path) {
    Section s(obj, path);
    SelfTrainConfig c;
    c.iterations = static_cast<int>(s.integer("iterations", c.iterations));
    const std::string variant = s.text("variant", "consistency");
    if (variant == "plain")
        c.variant = TrainingVariant::PlainRetrain;
    else if (variant == "consistency")
        c.variant = TrainingVariant::Consistency;
    else
        fail(s.key_path("variant"), "expected 'plain' or 'consistency', got '" + variant + "'");
    if (s.has("policy")) c.policy = parse_policy(s.raw("policy"), s.key_path("policy"));
    if (s.has("train")) c.train = parse_train(s.raw("train"), s.key_path("train"));
    if (s.has("aug")) c.aug = parse_aug(s.raw("aug"), s.key_path("aug"));
    s.finish();
    return c;
}

ScenarioSpec parse_synthetic(const Json& obj, const std::string& path) {
    Section s(obj, path);
    ScenarioSpec spec;
    spec.feature_dim = s.integer("feature_dim", spec.feature_dim);
    spec.groups = s.string_list("groups", spec.groups);
    spec.noise_scale = s.number("noise_scale", spec.noise_scale);
    spec.separability = s.number_map("separability", spec.separability);
    spec.class_shift = s.number_map("class_shift", spec.class_shift);
    spec.group_spacing = s.number("group_spacing", spec.group_spacing);
    spec.n_labeled = s.integer("n_labeled", spec.n_labeled);
    spec.labeled_majority_frac = s.number("labeled_majority_frac", spec.labeled_majority_frac);
    spec.labeled_class1_frac = s.number("labeled_class1_frac", spec.labeled_class1_frac);
    spec.n_unlabeled = s.integer("n_unlabeled", spec.n_unlabeled);
    spec.n_validation = s.integer("n_validation", spec.n_validation);
    spec.n_test = s.integer("n_test", spec.n_test);
    spec.minority_frac = s.number("minority_frac", spec.minority_frac);
    s.finish();
    return spec;
}

CsvSource parse_csv(const Json& obj, const std::string& path) {
    Section s(obj, path);
    CsvSource c;
    c.labeled = s.text("labeled", "");
    c.unlabeled = s.text("unlabeled", "");
    c.validation = s.text("validation", "");
    c.test = s.text("test", "");
    c.label_column = s.text("label_column", c.label_column);
    c.group_column = s.text("group_column", c.group_column);
    if (s.has("audit_class_column")) c.audit_class_column = s.text("audit_class_column", "");
    s.finish();
    return c;
}

SkewSpec parse_skew(const Json& obj, const std::string& path) {
    Section s(obj, path);
    SkewSpec skew;
    skew.class_ratio = s.number("class_ratio", skew.class_ratio);
    skew.group_weights = s.number_map("group_weights", skew.group_weights);
    const bool has_class = s.has("intersection_class");
    const bool has_group = s.has("intersection_group");
    if (has_class != has_group)
        fail(path, "intersection_class and intersection_group must be set together");
    if (has_class) {
        const long cls = s.integer("intersection_class", 0);
        skew.intersection_only = CellKey{static_cast<int>(cls), s.text("intersection_group", "")};
    }
    s.finish();
    return skew;
}

void check_range(double v, double lo, double hi, bool lo_open, bool hi_open,
                 const std::string& path) {
    const bool below = lo_open ? v <= lo : v < lo;
    const bool above = hi_open ? v >= hi : v > hi;
    if (!std::isfinite(v) || below || above) {
        std::ostringstream msg;
        msg << "must be in " << (lo_open ? '(' : '[') << lo << ", " << hi << (hi_open ? ')' : ']');
        fail(path, msg.str());
    }
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
    const TrainConfig& t = config.selftrain.train;
    if (!std::isfinite(t.learning_rate) || t.learning_rate <= 0.0)
        fail("selftrain.train.learning_rate", "must be > 0");
    check_range(t.momentum, 0.0, 1.0, false, true, "selftrain.train.momentum");
    if (t.batch_size < 1) fail("selftrain.train.batch_size", "must be >= 1");
    if (t.epochs_per_iteration < 1) fail("selftrain.train.epochs_per_iteration", "must be >= 1");
    if (t.patience < 0) fail("selftrain.train.patience", "must be >= 0");

    const AugmentConfig& a = config.selftrain.aug;
    if (!std::isfinite(a.weak_noise_sigma) || a.weak_noise_sigma < 0.0)
        fail("selftrain.aug.weak_noise_sigma", "must be >= 0");
    if (!std::isfinite(a.strong_noise_sigma) || a.strong_noise_sigma < a.weak_noise_sigma)
        fail("selftrain.aug.strong_noise_sigma", "must be >= weak_noise_sigma");
    check_range(a.strong_mask_prob, 0.0, 1.0, false, true, "selftrain.aug.strong_mask_prob");

    check_range(config.selftrain.policy.epsilon, 0.0, 1.0, true, true, "selftrain.policy.epsilon");
    check_range(config.selftrain.policy.base_threshold, 0.0, 1.0, true, true,
                "selftrain.policy.base_threshold");
    if (config.selftrain.iterations < 1) fail("selftrain.iterations", "must be >= 1");
    if (config.model.hidden_dim < 1) fail("model.hidden_dim", "must be >= 1");

    if (config.source == DataSource::Synthetic) {
        const ScenarioSpec& s = config.synthetic;
        if (s.feature_dim < 2) fail("data.synthetic.feature_dim", "must be >= 2");
        if (s.groups.size() < 2) fail("data.synthetic.groups", "needs at least 2 groups");
        if (!std::isfinite(s.noise_scale) || s.noise_scale <= 0.0)
            fail("data.synthetic.noise_scale", "must be > 0");
        if (s.n_labeled < 1 || s.n_unlabeled < 1 || s.n_validation < 1 || s.n_test < 1)
            fail("data.synthetic", "partition sizes must be >= 1");
        check_range(s.labeled_majority_frac, 0.0, 1.0, false, false,
                    "data.synthetic.labeled_majority_frac");
        check_range(s.labeled_class1_frac, 0.0, 1.0, false, false,
                    "data.synthetic.labeled_class1_frac");
        check_range(s.minority_frac, 0.0, 1.0, false, false, "data.synthetic.minority_frac");
        if (config.csv != CsvSource{})
            fail("data.csv", "not allowed when data.source is 'synthetic'");
    } else {
        if (config.scenario != ScenarioPreset::Custom)
            fail("data.source", "csv data requires scenario 'custom'");
        const CsvSource& c = config.csv;
        if (c.labeled.empty() || c.unlabeled.empty() || c.validation.empty() || c.test.empty())
            fail("data.csv", "labeled, unlabeled, validation and test paths are all required");
    }

    if (config.scenario == ScenarioPreset::Scenario1 && config.skew)
        fail("skew", "scenario1 uses a balanced unlabeled pool; use scenario2 or custom");
    if (config.scenario == ScenarioPreset::Scenario2 && !config.skew)
        fail("skew", "scenario2 requires a skew spec");
    if (config.skew) {
        check_range(config.skew->class_ratio, 0.0, 1.0, false, false, "skew.class_ratio");
        double sum = 0.0;
        for (const auto& [group, w] : config.skew->group_weights) {
            if (!std::isfinite(w) || w < 0.0)
                fail("skew.group_weights." + group, "must be >= 0");
            sum += w;
        }
        if (!config.skew->group_weights.empty() && sum <= 0.0)
            fail("skew.group_weights", "must sum to a positive value");
        if (config.skew->intersection_only) {
            const int cls = config.skew->intersection_only->first;
            if (cls != 0 && cls != 1) fail("skew.intersection_class", "must be 0 or 1");
        }
    }
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin + ": expected a JSON object");

    // A run manifest embeds its resolved config; accept it directly so a
    // manifest can reproduce its run.
    if (root.contains("artifact_version") && root.contains("config"))
        root = root.at("config");

    Section s(root, origin);
    ExperimentConfig config;

    const std::string scenario = s.text("scenario", "scenario1");
    if (scenario == "scenario1")
        config.scenario = ScenarioPreset::Scenario1;
    else if (scenario == "scenario2")
        config.scenario = ScenarioPreset::Scenario2;
    else if (scenario == "custom")
        config.scenario = ScenarioPreset::Custom;
    else
        fail(s.key_path("scenario"), "expected 'scenario1', 'scenario2' or 'custom'");

    config.seed = s.uinteger("seed", config.seed);
    config.out_dir = s.text("out_dir", "");
    config.dump_pseudo_labels = s.boolean("dump_pseudo_labels", false);

    if (s.has("data")) {
        Section data(s.raw("data"), s.key_path("data"));
        const std::string source = data.text("source", "synthetic");
        if (source == "synthetic")
            config.source = DataSource::Synthetic;
        else if (source == "csv")
            config.source = DataSource::Csv;
        else
            fail(data.key_path("source"), "expected 'synthetic' or 'csv'");
        if (data.has("synthetic")) {
            if (config.source != DataSource::Synthetic)
                fail(data.key_path("synthetic"), "not allowed when source is 'csv'");
            config.synthetic = parse_synthetic(data.raw("synthetic"), data.key_path("synthetic"));
        }
        if (data.has("csv")) {
            if (config.source != DataSource::Csv)
                fail(data.key_path("csv"), "not allowed when source is 'synthetic'");
            config.csv = parse_csv(data.raw("csv"), data.key_path("csv"));
        }
        data.finish();
    }

    if (s.has("skew")) config.skew = parse_skew(s.raw("skew"), s.key_path("skew"));
    if (config.scenario == ScenarioPreset::Scenario2 && !config.skew)
        config.skew = SkewSpec{0.8, {}, std::nullopt};

    if (s.has("model")) {
        Section model(s.raw("model"), s.key_path("model"));
        config.model.hidden_dim = model.integer("hidden_dim", config.model.hidden_dim);
        model.finish();
    }
    if (s.has("selftrain"))
        config.selftrain = parse_selftrain(s.raw("selftrain"), s.key_path("selftrain"));
    s.finish();

    config.selftrain.seed = config.seed;
    validate_config(config);
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path.string());
}

namespace {

Json skew_to_json(const SkewSpec& skew) {
    Json j;
    j["class_ratio"] = skew.class_ratio;
    j["group_weights"] = Json::object();
    for (const auto& [group, w] : skew.group_weights) j["group_weights"][group] = w;
    if (skew.intersection_only) {
        j["intersection_class"] = skew.intersection_only->first;
        j["intersection_group"] = skew.intersection_only->second;
    }
    return j;
}

}  // namespace

std::string write_config(const ExperimentConfig& config) {
    Json j;
    switch (config.scenario) {
        case ScenarioPreset::Scenario1: j["scenario"] = "scenario1"; break;
        case ScenarioPreset::Scenario2: j["scenario"] = "scenario2"; break;
        case ScenarioPreset::Custom: j["scenario"] = "custom"; break;
    }
    j["seed"] = config.seed;
    j["out_dir"] = config.out_dir;
    j["dump_pseudo_labels"] = config.dump_pseudo_labels;

    Json data;
    data["source"] = config.source == DataSource::Synthetic ? "synthetic" : "csv";
    if (config.source == DataSource::Synthetic) {
        const ScenarioSpec& s = config.synthetic;
        Json syn;
        syn["feature_dim"] = s.feature_dim;
        syn["groups"] = s.groups;
        syn["noise_scale"] = s.noise_scale;
        syn["separability"] = Json::object();
        for (const auto& [group, v] : s.separability) syn["separability"][group] = v;
        syn["class_shift"] = Json::object();
        for (const auto& [group, v] : s.class_shift) syn["class_shift"][group] = v;
        syn["group_spacing"] = s.group_spacing;
        syn["n_labeled"] = s.n_labeled;
        syn["labeled_majority_frac"] = s.labeled_majority_frac;
        syn["labeled_class1_frac"] = s.labeled_class1_frac;
        syn["n_unlabeled"] = s.n_unlabeled;
        syn["n_validation"] = s.n_validation;
        syn["n_test"] = s.n_test;
        syn["minority_frac"] = s.minority_frac;
        data["synthetic"] = syn;
    } else {
        const CsvSource& c = config.csv;
        Json csv;
        csv["labeled"] = c.labeled;
        csv["unlabeled"] = c.unlabeled;
        csv["validation"] = c.validation;
        csv["test"] = c.test;
        csv["label_column"] = c.label_column;
        csv["group_column"] = c.group_column;
        if (c.audit_class_column) csv["audit_class_column"] = *c.audit_class_column;
        data["csv"] = csv;
    }
    j["data"] = data;

    if (config.skew) j["skew"] = skew_to_json(*config.skew);

    j["model"] = Json{{"hidden_dim", config.model.hidden_dim}};

    Json st;
    st["iterations"] = config.selftrain.iterations;
    st["variant"] = config.selftrain.variant == TrainingVariant::PlainRetrain ? "plain" : "consistency";
    st["policy"] =
        Json{{"kind", config.selftrain.policy.kind == ThresholdKind::Fixed ? "fixed" : "curriculum"},
             {"epsilon", config.selftrain.policy.epsilon},
             {"base_threshold", config.selftrain.policy.base_threshold},
             {"pseudo_balance", config.selftrain.policy.pseudo_balance}};
    st["train"] = Json{{"learning_rate", config.selftrain.train.learning_rate},
                       {"momentum", config.selftrain.train.momentum},
                       {"batch_size", config.selftrain.train.batch_size},
                       {"epochs_per_iteration", config.selftrain.train.epochs_per_iteration},
                       {"patience", config.selftrain.train.patience}};
    st["aug"] = Json{{"weak_noise_sigma", config.selftrain.aug.weak_noise_sigma},
                     {"strong_noise_sigma", config.selftrain.aug.strong_noise_sigma},
                     {"strong_mask_prob", config.selftrain.aug.strong_mask_prob}};
    j["selftrain"] = st;

    return j.dump(2) + "\n";
}

}  // namespace psb
