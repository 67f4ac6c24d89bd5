#include "psb/dataset.hpp"

#include "psb/hash.hpp"
#include "psb/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace psb {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t cell_salt(const CellKey& cell) {
    return fnv1a64(cell.second) ^ static_cast<std::uint64_t>(cell.first + 1);
}

void validate_spec(const SyntheticSpec& spec) {
    if (spec.feature_dim < 1) throw ConfigError("synthetic: feature_dim must be >= 1");
    if (!std::isfinite(spec.noise_scale) || spec.noise_scale <= 0.0)
        throw ConfigError("synthetic: noise scale must be finite and > 0");
    if (!spec.separability.empty() && spec.groups.size() < 2)
        throw ConfigError("synthetic: per-group separability needs at least 2 groups");
    for (const auto& [group, s] : spec.separability) {
        if (!std::isfinite(s) || s < 0.0)
            throw ConfigError("synthetic: separability for group '" + group + "' must be finite and >= 0");
    }
    long total = 0;
    for (const auto& [cell, count] : spec.counts) {
        if (count < 0) throw ConfigError("synthetic: negative count for a cell");
        total += count;
        auto it = spec.means.find(cell);
        if (it == spec.means.end())
            throw ConfigError("synthetic: no mean vector for cell (" + std::to_string(cell.first) +
                              ", " + cell.second + ")");
        if (it->second.size() != spec.feature_dim)
            throw ConfigError("synthetic: mean dimension mismatch for group '" + cell.second + "'");
        if (!it->second.allFinite())
            throw ConfigError("synthetic: non-finite mean for group '" + cell.second + "'");
    }
    if (total == 0) throw DataError("synthetic: spec produces an empty dataset");
}

// Class selection target for apply_skew: largest subset hitting the ratio,
// with the class-1 count within one sample of exact.
std::pair<long, long> skew_targets(long avail0, long avail1, double ratio) {
    if (ratio <= 0.0) return {avail0, 0};
    if (ratio >= 1.0) return {0, avail1};

    long k1 = std::min<long>(
        avail1,
        static_cast<long>(std::floor((static_cast<double>(avail0) + 0.5) * ratio / (1.0 - ratio))));
    long k0 = std::min<long>(avail0, std::lround(static_cast<double>(k1) * (1.0 - ratio) / ratio));

    auto feasible = [&](long c0, long c1) {
        if (c0 < 0 || c1 < 0 || c0 > avail0 || c1 > avail1 || c0 + c1 == 0) return false;
        const double total = static_cast<double>(c0 + c1);
        return std::abs(static_cast<double>(c1) - ratio * total) <= 1.0;
    };

    if (feasible(k0, k1)) return {k0, k1};

    // Rounding or clamping pushed us off target; search the neighborhood.
    std::pair<long, long> best{0, 0};
    long best_total = -1;
    for (long d1 = -2; d1 <= 2; ++d1) {
        for (long d0 = -2; d0 <= 2; ++d0) {
            const long c0 = k0 + d0;
            const long c1 = k1 + d1;
            if (feasible(c0, c1) && c0 + c1 > best_total) {
                best_total = c0 + c1;
                best = {c0, c1};
            }
        }
    }
    return best;
}

// Efraimidis-Spirakis weighted reservoir keys: pick k items with probability
// proportional to weight, without replacement. Returns flags in pool order.
std::vector<char> weighted_pick(const std::vector<std::size_t>& candidates,
                                const std::vector<double>& weights, long k, std::size_t pool_size,
                                std::mt19937_64& rng) {
    std::vector<char> chosen(pool_size, 0);
    if (k <= 0) return chosen;
    std::uniform_real_distribution<double> unit(std::numeric_limits<double>::min(), 1.0);
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const double key = std::log(unit(rng)) / weights[j];
        keyed.emplace_back(key, candidates[j]);
    }
    auto mid = keyed.begin() + std::min<std::size_t>(static_cast<std::size_t>(k), keyed.size());
    std::partial_sort(keyed.begin(), mid, keyed.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    for (auto it = keyed.begin(); it != mid; ++it) chosen[it->second] = 1;
    return chosen;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_finite(const std::string& cell, long row, const std::string& column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw DataError("csv row " + std::to_string(row) + ", column " + column +
                        ": not a finite real: '" + cell + "'");
    return v;
}

int parse_binary(const std::string& cell, long row, const std::string& column) {
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw DataError("csv row " + std::to_string(row) + ", column " + column +
                    ": expected 0 or 1, got '" + cell + "'");
}

}  // namespace

DatasetBundle generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    validate_spec(spec);

    DatasetBundle bundle;
    bundle.feature_dim = spec.feature_dim;
    bundle.seed = seed;

    for (const auto& [cell, count] : spec.counts) {
        if (count == 0) continue;
        const auto& [cls, group] = cell;

        Vector mean = spec.means.at(cell);
        auto other = spec.means.find({1 - cls, group});
        auto sep = spec.separability.find(group);
        if (other != spec.means.end() && sep != spec.separability.end()) {
            const Vector midpoint = 0.5 * (mean + other->second);
            mean = midpoint + sep->second * (mean - midpoint);
        }

        auto rng = make_rng(derive_seed(seed, cell_salt(cell)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (long i = 0; i < count; ++i) {
            Sample s;
            s.id = spec.id_prefix + "-" + group + "-c" + std::to_string(cls) + "-" + std::to_string(i);
            s.features = Vector(spec.feature_dim);
            for (Eigen::Index d = 0; d < spec.feature_dim; ++d)
                s.features[d] = mean[d] + spec.noise_scale * gauss(rng);
            s.label = cls;
            s.group = GroupKey{cls, group};
            bundle.labeled.push_back(std::move(s));
        }
    }
    return bundle;
}

std::vector<Sample> apply_skew(const std::vector<Sample>& pool, const SkewSpec& spec,
                               std::uint64_t seed) {
    if (pool.empty()) throw DataError("apply_skew: empty pool");
    if (!std::isfinite(spec.class_ratio) || spec.class_ratio < 0.0 || spec.class_ratio > 1.0)
        throw ConfigError("skew: class_ratio must be in [0, 1]");
    double weight_sum = 0.0;
    for (const auto& [group, w] : spec.group_weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw ConfigError("skew: group weight for '" + group + "' must be finite and >= 0");
        weight_sum += w;
    }
    if (!spec.group_weights.empty() && weight_sum <= 0.0)
        throw ConfigError("skew: group weights must sum to a positive value");

    auto weight_of = [&](const std::string& group) {
        if (spec.group_weights.empty()) return 1.0;
        auto it = spec.group_weights.find(group);
        return it == spec.group_weights.end() ? 0.0 : it->second;
    };

    // Candidates per class, in pool order, with their group weights.
    std::vector<std::size_t> cand[2];
    std::vector<double> cand_w[2];
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const Sample& s = pool[i];
        const int cls = audit_class(s);
        if (spec.intersection_only) {
            if (cls != spec.intersection_only->first ||
                s.group.group_attr != spec.intersection_only->second)
                continue;
        }
        const double w = weight_of(s.group.group_attr);
        if (w <= 0.0) continue;
        if (cls != 0 && cls != 1) throw DataError("apply_skew: sample class outside {0,1}");
        cand[cls].push_back(i);
        cand_w[cls].push_back(w);
    }

    auto [k0, k1] = skew_targets(static_cast<long>(cand[0].size()),
                                 static_cast<long>(cand[1].size()), spec.class_ratio);
    if (k0 + k1 == 0) throw DataError("apply_skew: spec is unsatisfiable on this pool");

    auto rng = make_rng(seed);
    std::vector<char> keep0 = weighted_pick(cand[0], cand_w[0], k0, pool.size(), rng);
    std::vector<char> keep1 = weighted_pick(cand[1], cand_w[1], k1, pool.size(), rng);

    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(k0 + k1));
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (keep0[i] || keep1[i]) out.push_back(pool[i]);
    return out;
}

std::vector<Sample> curate_balanced_test(const std::vector<Sample>& pool, std::uint64_t seed) {
    std::vector<std::size_t> byclass[2];
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const int cls = audit_class(pool[i]);
        if (cls != 0 && cls != 1) throw DataError("curate_balanced_test: class outside {0,1}");
        byclass[cls].push_back(i);
    }
    if (byclass[0].empty() || byclass[1].empty())
        throw DataError("curate_balanced_test: a class is absent from the pool");

    const std::size_t m = std::min(byclass[0].size(), byclass[1].size());
    std::vector<char> keep(pool.size(), 0);
    for (int cls = 0; cls < kNumClasses; ++cls) {
        auto rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
        for (std::size_t j : sample_without_replacement(byclass[cls].size(), m, rng))
            keep[byclass[cls][j]] = 1;
    }

    std::vector<Sample> out;
    out.reserve(2 * m);
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (keep[i]) out.push_back(pool[i]);
    return out;
}

std::vector<Sample> load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open csv file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("csv file has no header: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::unordered_map<std::string, std::size_t> col;
    {
        auto header = split_line(line);
        for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    }
    auto require = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end())
            throw ConfigError("csv schema: column '" + name + "' missing from " + path.string());
        return it->second;
    };

    std::vector<std::size_t> feature_idx;
    feature_idx.reserve(schema.feature_columns.size());
    for (const auto& name : schema.feature_columns) feature_idx.push_back(require(name));
    std::optional<std::size_t> label_idx, class_idx, group_idx;
    if (schema.label_column) label_idx = require(*schema.label_column);
    if (schema.class_column) class_idx = require(*schema.class_column);
    if (!schema.group_column.empty()) group_idx = require(schema.group_column);

    const std::string stem = path.stem().string();
    const Eigen::Index dim = static_cast<Eigen::Index>(schema.feature_columns.size());
    std::vector<Sample> samples;
    long row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++row;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != col.size())
            throw DataError("csv row " + std::to_string(row) + ": expected " +
                            std::to_string(col.size()) + " cells, got " + std::to_string(cells.size()));

        Sample s;
        s.id = stem + ":" + std::to_string(row);
        s.features = Vector(dim);
        for (Eigen::Index d = 0; d < dim; ++d)
            s.features[d] = parse_finite(cells[feature_idx[static_cast<std::size_t>(d)]], row,
                                         schema.feature_columns[static_cast<std::size_t>(d)]);
        if (label_idx) s.label = parse_binary(cells[*label_idx], row, *schema.label_column);
        if (group_idx) s.group.group_attr = cells[*group_idx];
        if (class_idx)
            s.group.class_attr = parse_binary(cells[*class_idx], row, *schema.class_column);
        else if (s.label)
            s.group.class_attr = *s.label;
        samples.push_back(std::move(s));
    }
    return samples;
}

void save_csv(const std::filesystem::path& path, const std::vector<Sample>& samples,
              const CsvSchema& schema) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open csv file for writing: " + path.string());

    std::string header;
    for (const auto& name : schema.feature_columns) {
        if (!header.empty()) header += ',';
        header += name;
    }
    if (schema.label_column) header += ',' + *schema.label_column;
    if (schema.class_column) header += ',' + *schema.class_column;
    if (!schema.group_column.empty()) header += ',' + schema.group_column;
    out << header << '\n';

    const Eigen::Index dim = static_cast<Eigen::Index>(schema.feature_columns.size());
    for (const Sample& s : samples) {
        if (s.features.size() != dim)
            throw DataError("save_csv: sample '" + s.id + "' has feature dim " +
                            std::to_string(s.features.size()) + ", schema expects " +
                            std::to_string(dim));
        std::string line;
        for (Eigen::Index d = 0; d < dim; ++d) {
            if (d > 0) line += ',';
            line += format_double(s.features[d]);
        }
        if (schema.label_column) {
            if (!s.label) throw DataError("save_csv: unlabeled sample '" + s.id + "' under a label column");
            line += ',' + std::to_string(*s.label);
        }
        if (schema.class_column) line += ',' + std::to_string(s.group.class_attr);
        if (!schema.group_column.empty()) line += ',' + s.group.group_attr;
        out << line << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Sample> as_unlabeled(std::vector<Sample> samples) {
    for (Sample& s : samples) s.label.reset();
    return samples;
}

// ---------------------------------------------------------------------------
// Scenario builders
// ---------------------------------------------------------------------------

namespace {

// Distributes `total` over the groups: frac_first to groups[0], the rest
// split evenly across the remaining groups.
std::map<std::string, long> group_allocation(const std::vector<std::string>& groups, long total,
                                             double frac_first) {
    std::map<std::string, long> alloc;
    const long first = std::lround(static_cast<double>(total) * frac_first);
    alloc[groups[0]] = first;
    const long rest = total - first;
    const long others = static_cast<long>(groups.size()) - 1;
    for (long i = 1; i <= others; ++i) {
        const long share = rest / others + (i <= rest % others ? 1 : 0);
        alloc[groups[static_cast<std::size_t>(i)]] = share;
    }
    return alloc;
}

std::map<CellKey, long> cell_counts(const std::vector<std::string>& groups, long total,
                                    double frac_first, double class1_frac) {
    std::map<CellKey, long> counts;
    for (const auto& [group, n] : group_allocation(groups, total, frac_first)) {
        const long n1 = std::lround(static_cast<double>(n) * class1_frac);
        counts[{0, group}] = n - n1;
        counts[{1, group}] = n1;
    }
    return counts;
}

void validate_scenario(const ScenarioSpec& spec) {
    if (spec.groups.size() < 2) throw ConfigError("scenario: needs at least 2 groups");
    if (spec.feature_dim < 2) throw ConfigError("scenario: feature_dim must be >= 2");
    if (spec.n_labeled <= 0 || spec.n_unlabeled <= 0 || spec.n_validation <= 0 || spec.n_test <= 0)
        throw ConfigError("scenario: partition sizes must be positive");
    for (const char* name : {"labeled_majority_frac", "labeled_class1_frac", "minority_frac"}) {
        const double v = std::string(name) == "labeled_majority_frac" ? spec.labeled_majority_frac
                         : std::string(name) == "labeled_class1_frac" ? spec.labeled_class1_frac
                                                                      : spec.minority_frac;
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw ConfigError(std::string("scenario: ") + name + " must be in [0, 1]");
    }
}

void reprefix_ids(std::vector<Sample>& samples, const std::string& prefix) {
    long i = 0;
    for (Sample& s : samples) s.id = prefix + "-" + std::to_string(i++);
}

}  // namespace

SyntheticSpec scenario_cells(const ScenarioSpec& spec, const std::map<CellKey, long>& counts,
                             const std::string& id_prefix) {
    SyntheticSpec out;
    out.feature_dim = spec.feature_dim;
    out.groups = spec.groups;
    out.counts = counts;
    out.noise_scale = spec.noise_scale;
    out.separability = spec.separability;
    out.id_prefix = id_prefix;

    for (std::size_t gi = 0; gi < spec.groups.size(); ++gi) {
        const std::string& group = spec.groups[gi];
        Vector centroid = Vector::Zero(spec.feature_dim);
        centroid[1] = spec.group_spacing * static_cast<double>(gi);
        auto shift_it = spec.class_shift.find(group);
        const double shift = shift_it == spec.class_shift.end() ? 0.0 : shift_it->second;
        for (int cls = 0; cls < kNumClasses; ++cls) {
            Vector mean = centroid;
            mean[0] += shift + (cls == 1 ? 0.5 : -0.5);
            out.means[{cls, group}] = mean;
        }
    }
    return out;
}

namespace {

DatasetBundle assemble_scenario(const ScenarioSpec& spec, std::uint64_t seed,
                                const std::map<CellKey, long>& labeled_counts,
                                const std::optional<SkewSpec>& unlabeled_skew) {
    validate_scenario(spec);

    DatasetBundle bundle;
    bundle.feature_dim = spec.feature_dim;
    bundle.seed = seed;

    bundle.labeled =
        generate_synthetic(scenario_cells(spec, labeled_counts, "lab"), derive_seed(seed, 1))
            .labeled;

    auto unl_counts = cell_counts(spec.groups, spec.n_unlabeled,
                                  1.0 / static_cast<double>(spec.groups.size()), 0.5);
    auto pool =
        generate_synthetic(scenario_cells(spec, unl_counts, "unl"), derive_seed(seed, 2)).labeled;
    if (unlabeled_skew) pool = apply_skew(pool, *unlabeled_skew, derive_seed(seed, 5));
    bundle.unlabeled = as_unlabeled(std::move(pool));
    reprefix_ids(bundle.unlabeled, "unl");

    auto val_counts = cell_counts(spec.groups, spec.n_validation, 1.0 - spec.minority_frac, 0.5);
    bundle.validation =
        generate_synthetic(scenario_cells(spec, val_counts, "val"), derive_seed(seed, 3)).labeled;

    auto test_counts = cell_counts(spec.groups, spec.n_test, 1.0 - spec.minority_frac, 0.5);
    auto test_pool =
        generate_synthetic(scenario_cells(spec, test_counts, "tst"), derive_seed(seed, 4)).labeled;
    bundle.test = curate_balanced_test(test_pool, derive_seed(seed, 6));

    return bundle;
}

}  // namespace

DatasetBundle build_scenario1(const ScenarioSpec& spec, std::uint64_t seed) {
    auto labeled_counts = cell_counts(spec.groups, spec.n_labeled, spec.labeled_majority_frac,
                                      spec.labeled_class1_frac);
    return assemble_scenario(spec, seed, labeled_counts, std::nullopt);
}

DatasetBundle build_scenario2(const ScenarioSpec& spec, const SkewSpec& skew, std::uint64_t seed) {
    auto labeled_counts = cell_counts(spec.groups, spec.n_labeled,
                                      1.0 / static_cast<double>(spec.groups.size()),
                                      spec.labeled_class1_frac);
    return assemble_scenario(spec, seed, labeled_counts, skew);
}

}  // namespace psb
