#ifndef FCERT_DATASET_HPP
#define FCERT_DATASET_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fcert/distance.hpp"
#include "fcert/prng.hpp"
#include "fcert/types.hpp"

namespace fcert {

struct Sample {
    std::string id;
    int label = 0;   // interned class id
    FeatureVector features;
};

/// Labeled feature vectors with labels interned to contiguous class ids.
struct FeatureDataset {
    std::vector<std::string> labels;               // class id -> label string
    std::vector<Sample> samples;
    std::vector<std::vector<std::size_t>> by_class;   // class id -> sample indices
    int dim = 0;

    int classes() const { return static_cast<int>(labels.size()); }
};

namespace dataio_detail {

inline FeatureDataset from_records(
    const std::vector<std::pair<std::string, std::pair<std::string, FeatureVector>>>& recs) {
    FeatureDataset ds;
    std::map<std::string, int> intern;
    for (const auto& [id, rest] : recs) {
        const auto& [label, features] = rest;
        auto [it, fresh] = intern.emplace(label, static_cast<int>(ds.labels.size()));
        if (fresh) {
            ds.labels.push_back(label);
            ds.by_class.emplace_back();
        }
        ds.by_class[it->second].push_back(ds.samples.size());
        ds.samples.push_back({id, it->second, features});
    }
    if (!ds.samples.empty()) ds.dim = static_cast<int>(ds.samples.front().features.size());
    return ds;
}

} // namespace dataio_detail

/// Parse a JSON Lines dataset: one {"id", "label", "features"} record per
/// line, with an optional leading {"_meta": {"dim": N}} header.
inline FeatureDataset parse_dataset(std::istream& in, const std::string& origin) {
    std::vector<std::pair<std::string, std::pair<std::string, FeatureVector>>> recs;
    std::string line;
    int line_no = 0;
    int declared_dim = -1;
    int dim = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw data_error(origin + ": parse error at line " + std::to_string(line_no) +
                             ": " + e.what());
        }
        if (j.contains("_meta")) {
            if (j["_meta"].contains("dim")) declared_dim = j["_meta"]["dim"].get<int>();
            continue;
        }
        if (!j.contains("id") || !j.contains("label") || !j.contains("features")) {
            throw data_error(origin + ": line " + std::to_string(line_no) +
                             ": record needs id, label and features");
        }
        const std::string id = j["id"].get<std::string>();
        const std::string label = j["label"].get<std::string>();
        if (label.empty()) {
            throw data_error(origin + ": empty label in record '" + id + "'");
        }
        FeatureVector features;
        for (const auto& v : j["features"]) {
            if (!v.is_number()) {
                throw data_error(origin + ": non-numeric feature in record '" + id + "'");
            }
            features.push_back(v.get<double>());
        }
        for (double x : features) {
            if (!std::isfinite(x)) {
                throw data_error(origin + ": non-finite feature in record '" + id + "'");
            }
        }
        if (features.empty()) {
            throw data_error(origin + ": empty feature vector in record '" + id + "'");
        }
        if (dim < 0) dim = static_cast<int>(features.size());
        if (static_cast<int>(features.size()) != dim) {
            throw data_error(origin + ": dimension mismatch at line " + std::to_string(line_no) +
                             " (record '" + id + "': got " + std::to_string(features.size()) +
                             ", expected " + std::to_string(dim) + ")");
        }
        recs.emplace_back(id, std::make_pair(label, std::move(features)));
    }
    if (declared_dim >= 0 && dim >= 0 && declared_dim != dim) {
        throw data_error(origin + ": _meta.dim " + std::to_string(declared_dim) +
                         " does not match record dimension " + std::to_string(dim));
    }
    return dataio_detail::from_records(recs);
}

inline FeatureDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error(path + ": cannot open dataset file");
    return parse_dataset(in, path);
}

/// Canonical JSONL serialization; loading its output reproduces the dataset.
inline void save_dataset(const FeatureDataset& ds, std::ostream& out) {
    out << "{\"_meta\":{\"dim\":" << ds.dim << "}}\n";
    for (const auto& s : ds.samples) {
        nlohmann::ordered_json j;
        j["id"] = s.id;
        j["label"] = ds.labels[s.label];
        j["features"] = s.features;
        out << j.dump() << "\n";
    }
}

inline void save_dataset(const FeatureDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error(path + ": cannot open for writing");
    save_dataset(ds, out);
}

/// Gaussian clusters around well-separated random unit directions; a desk-
/// scale stand-in for foundation-model embeddings. Deterministic in seed.
inline FeatureDataset synth_gaussian(int classes, int per_class, int dim, double separation,
                                     double sigma, std::uint64_t seed) {
    if (classes < 1 || per_class < 1 || dim < 1 || separation <= 0.0 || sigma < 0.0) {
        throw input_error("synth_gaussian: all parameters must be positive");
    }
    Prng rng(derive_seed(seed, "synth"));
    std::vector<FeatureVector> means;
    for (int c = 0; c < classes; ++c) {
        FeatureVector mean;
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            FeatureVector u(dim);
            for (double& v : u) v = rng.next_normal();
            const double n = norm(u);
            if (n == 0.0) continue;
            for (double& v : u) v = v / n * separation;
            placed = true;
            for (const auto& m : means) {
                if (dot(m, u) / (separation * separation) >= 0.5) {
                    placed = false;
                    break;
                }
            }
            if (placed) mean = std::move(u);
        }
        if (!placed) {
            throw input_error("synth_gaussian: could not place well-separated class means "
                              "(dimension too small for this many classes)");
        }
        means.push_back(std::move(mean));
    }
    std::vector<std::pair<std::string, std::pair<std::string, FeatureVector>>> recs;
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < per_class; ++i) {
            FeatureVector x = means[c];
            for (double& v : x) v += sigma * rng.next_normal();
            recs.emplace_back("c" + std::to_string(c) + "_s" + std::to_string(i),
                              std::make_pair("class" + std::to_string(c), std::move(x)));
        }
    }
    return dataio_detail::from_records(recs);
}

} // namespace fcert

#endif
