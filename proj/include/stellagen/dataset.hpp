#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stellagen/rng.hpp"

namespace stellagen {

// Condition vector layout: (mean_iota, aspect_ratio, nfp, helicity).
using Condition = Eigen::Vector4d;

struct Record {
    std::string id;
    Eigen::VectorXd features;
    Condition conditions;

    double mean_iota() const { return conditions[0]; }
    double aspect_ratio() const { return conditions[1]; }
    int nfp() const { return static_cast<int>(std::lround(conditions[2])); }
    int helicity() const { return static_cast<int>(std::lround(conditions[3])); }
};

struct Dataset {
    Eigen::Index n_x = 0;
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

inline void validate_record(const Record& r, Eigen::Index expected_nx) {
    if (r.features.size() != expected_nx)
        throw std::runtime_error("record '" + r.id + "': feature length " +
                                 std::to_string(r.features.size()) + " does not match n_x " +
                                 std::to_string(expected_nx));
    const double nfp = r.conditions[2], N = r.conditions[3];
    if (!(nfp >= 1.0) || nfp != std::floor(nfp))
        throw std::runtime_error("record '" + r.id + "': nfp must be a positive integer");
    if (N != 0.0 && N != 1.0)
        throw std::runtime_error("record '" + r.id + "': helicity must be 0 or 1");
    if (!(r.conditions[1] > 1.0))
        throw std::runtime_error("record '" + r.id + "': aspect ratio must exceed 1");
    if (!(r.conditions[0] > 0.0))
        throw std::runtime_error("record '" + r.id + "': mean iota must be positive");
}

// JSON-Lines schema, one record per line:
// {"id": str, "nfp": int, "helicity": int, "aspect_ratio": float, "mean_iota": float,
//  "coeffs": [float; n_x]}
inline Dataset load_dataset(const std::string& path, Eigen::Index expected_nx) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset " + path);
    Dataset ds;
    ds.n_x = expected_nx;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed JSON record: " + e.what());
        }
        Record r;
        try {
            r.id = j.at("id").get<std::string>();
            auto coeffs = j.at("coeffs").get<std::vector<double>>();
            r.features = Eigen::Map<Eigen::VectorXd>(coeffs.data(),
                                                     static_cast<Eigen::Index>(coeffs.size()));
            r.conditions << j.at("mean_iota").get<double>(), j.at("aspect_ratio").get<double>(),
                static_cast<double>(j.at("nfp").get<int>()),
                static_cast<double>(j.at("helicity").get<int>());
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": record missing field: " + e.what());
        }
        validate_record(r, expected_nx);
        ds.records.push_back(std::move(r));
    }
    return ds;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const Record& r : ds.records) {
        nlohmann::json j{{"id", r.id},
                         {"nfp", r.nfp()},
                         {"helicity", r.helicity()},
                         {"aspect_ratio", r.aspect_ratio()},
                         {"mean_iota", r.mean_iota()},
                         {"coeffs", std::vector<double>(r.features.data(),
                                                        r.features.data() + r.features.size())}};
        out << j.dump() << '\n';
    }
}

// Per-dimension z-score parameters for features and conditions. Dimensions whose
// population standard deviation falls below the floor keep scale 1 so constant
// dimensions pass through unchanged.
struct Normalizer {
    Eigen::VectorXd feature_mean, feature_scale;
    Condition condition_mean, condition_scale;
};

inline Normalizer fit_normalizer(const Dataset& ds, double floor = 1e-8) {
    if (ds.empty()) throw std::invalid_argument("fit_normalizer: empty dataset");
    if (!(floor > 0.0)) throw std::invalid_argument("fit_normalizer: floor must be positive");
    const Eigen::Index nx = ds.n_x;
    const double n = static_cast<double>(ds.size());

    Normalizer nm;
    nm.feature_mean = Eigen::VectorXd::Zero(nx);
    for (const Record& r : ds.records) nm.feature_mean += r.features;
    nm.feature_mean /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(nx);
    for (const Record& r : ds.records) var += (r.features - nm.feature_mean).cwiseAbs2();
    var /= n;
    nm.feature_scale = var.cwiseSqrt();
    for (Eigen::Index i = 0; i < nx; ++i)
        if (nm.feature_scale[i] < floor) nm.feature_scale[i] = 1.0;

    nm.condition_mean.setZero();
    for (const Record& r : ds.records) nm.condition_mean += r.conditions;
    nm.condition_mean /= n;
    Condition cvar = Condition::Zero();
    for (const Record& r : ds.records) cvar += (r.conditions - nm.condition_mean).cwiseAbs2();
    cvar /= n;
    nm.condition_scale = cvar.cwiseSqrt();
    for (int i = 0; i < 4; ++i)
        if (nm.condition_scale[i] < floor) nm.condition_scale[i] = 1.0;
    return nm;
}

inline Record normalize(const Record& r, const Normalizer& nm) {
    if (r.features.size() != nm.feature_mean.size())
        throw std::invalid_argument("normalize: feature dimension mismatch");
    Record out = r;
    out.features = (r.features - nm.feature_mean).cwiseQuotient(nm.feature_scale);
    out.conditions = (r.conditions - nm.condition_mean).cwiseQuotient(nm.condition_scale);
    return out;
}

inline Record denormalize(const Record& r, const Normalizer& nm) {
    if (r.features.size() != nm.feature_mean.size())
        throw std::invalid_argument("denormalize: feature dimension mismatch");
    Record out = r;
    out.features = r.features.cwiseProduct(nm.feature_scale) + nm.feature_mean;
    out.conditions = r.conditions.cwiseProduct(nm.condition_scale) + nm.condition_mean;
    return out;
}

inline Condition normalize_condition(const Condition& y, const Normalizer& nm) {
    return (y - nm.condition_mean).cwiseQuotient(nm.condition_scale);
}

inline Eigen::VectorXd denormalize_features(const Eigen::VectorXd& f, const Normalizer& nm) {
    return f.cwiseProduct(nm.feature_scale) + nm.feature_mean;
}

// Deterministic disjoint/exhaustive split; membership depends only on the seed.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                         double val_fraction, std::uint64_t seed) {
    if (train_fraction < 0.0 || val_fraction < 0.0 ||
        std::abs(train_fraction + val_fraction - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must be non-negative and sum to 1");
    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0x5917ULL));
    rng.shuffle(order);
    const std::size_t n_train =
        std::min(ds.size(), static_cast<std::size_t>(std::llround(train_fraction * ds.size())));
    Dataset train, val;
    train.n_x = val.n_x = ds.n_x;
    for (std::size_t k = 0; k < order.size(); ++k)
        (k < n_train ? train : val).records.push_back(ds.records[order[k]]);
    return {std::move(train), std::move(val)};
}

// Seeded per-(seed, epoch) shuffle chunked into batches; every record appears
// exactly once per epoch, final batch may be short.
inline std::vector<std::vector<std::size_t>> batch_indices(std::size_t n_records,
                                                           std::size_t batch_size,
                                                           std::uint64_t seed, std::uint64_t epoch) {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    std::vector<std::size_t> order(n_records);
    for (std::size_t i = 0; i < n_records; ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0xba7cULL, epoch));
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n_records; start += batch_size) {
        const std::size_t stop = std::min(n_records, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<long>(start),
                             order.begin() + static_cast<long>(stop));
    }
    return batches;
}

struct ConditionRow {
    int nfp = 1;
    int helicity = 0;
    double aspect_ratio = 0.0;
    double mean_iota = 0.0;

    Condition as_condition() const {
        return Condition(mean_iota, aspect_ratio, static_cast<double>(nfp),
                         static_cast<double>(helicity));
    }
    bool operator==(const ConditionRow&) const = default;
};

// Conditions used for in-sample and out-of-sample generation.
inline const std::array<ConditionRow, 7>& table1_in_sample() {
    static const std::array<ConditionRow, 7> rows{{
        {2, 0, 4.0, 0.3},
        {3, 1, 8.0, 1.3},
        {4, 1, 8.0, 1.6},
        {5, 1, 8.0, 1.6},
        {6, 1, 8.0, 2.6},
        {7, 1, 12.0, 3.0},
        {8, 1, 12.0, 3.5},
    }};
    return rows;
}

inline const std::array<ConditionRow, 8>& table1_out_of_sample() {
    static const std::array<ConditionRow, 8> rows{{
        {2, 0, 4.5, 0.36},
        {3, 0, 18.5, 0.5},
        {3, 1, 9.0, 0.5},
        {4, 1, 11.0, 1.4},
        {5, 1, 17.0, 2.5},
        {6, 1, 14.0, 2.0},
        {7, 1, 11.0, 3.7},
        {8, 1, 22.0, 3.5},
    }};
    return rows;
}

namespace detail {
inline std::vector<ConditionRow> condition_rows_from_json(const nlohmann::json& arr) {
    std::vector<ConditionRow> rows;
    for (const auto& e : arr)
        rows.push_back({e.at("nfp").get<int>(), e.at("helicity").get<int>(),
                        e.at("aspect_ratio").get<double>(), e.at("mean_iota").get<double>()});
    return rows;
}
}  // namespace detail

inline std::vector<ConditionRow> load_condition_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open condition table " + path);
    nlohmann::json j;
    in >> j;
    if (!j.contains("rows"))
        throw std::runtime_error(path + ": condition table must have a \"rows\" array");
    return detail::condition_rows_from_json(j.at("rows"));
}

// The shipped fixture mirrors the in-sample / out-of-sample condition table.
inline std::pair<std::vector<ConditionRow>, std::vector<ConditionRow>> load_table1_fixture(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open condition fixture " + path);
    nlohmann::json j;
    in >> j;
    return {detail::condition_rows_from_json(j.at("in_sample")),
            detail::condition_rows_from_json(j.at("out_of_sample"))};
}

}  // namespace stellagen
