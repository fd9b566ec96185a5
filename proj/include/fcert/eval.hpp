#ifndef FCERT_EVAL_HPP
#define FCERT_EVAL_HPP

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fcert/attack.hpp"
#include "fcert/certify.hpp"
#include "fcert/classify.hpp"
#include "fcert/dataset.hpp"
#include "fcert/prng.hpp"
#include "fcert/types.hpp"

namespace fcert {

enum class Method {
    FCert,
    FCertWeighted,
    ProtoNet,
    KNN,
};

inline std::string to_string(Method m) {
    switch (m) {
        case Method::FCert: return "fcert";
        case Method::FCertWeighted: return "fcert-weighted";
        case Method::ProtoNet: return "protonet";
        case Method::KNN: return "knn";
    }
    return "?";
}

struct EvalConfig {
    int batches = 20;
    int queries_per_class = 1;
    FewShotConfig few_shot;                       // C=5, K=5, K'=2, squared l2
    std::uint64_t seed = 0;
    std::vector<Method> methods = {Method::FCert, Method::FCertWeighted,
                                   Method::ProtoNet, Method::KNN};
    std::vector<AttackModel> attack_models = {AttackModel::Individual, AttackModel::Group};
    AttackStrategy strategy = AttackStrategy::Collision;
    int knn_k = 5;
};

/// Draw the paper-style episode batches: C classes without replacement, then
/// K supports and the queries per class without replacement. Queries never
/// overlap the chosen supports. Fully determined by cfg.seed.
inline std::vector<Episode> sample_episodes(const FeatureDataset& ds, const EvalConfig& cfg) {
    cfg.few_shot.validate();
    const int ways = cfg.few_shot.ways;
    const int need = cfg.few_shot.shots + cfg.queries_per_class;
    if (ds.classes() < ways) {
        throw input_error("sample_episodes: dataset has " + std::to_string(ds.classes()) +
                          " classes, need " + std::to_string(ways));
    }
    for (int c = 0; c < ds.classes(); ++c) {
        if (static_cast<int>(ds.by_class[c].size()) < need) {
            throw input_error("sample_episodes: class '" + ds.labels[c] + "' has " +
                              std::to_string(ds.by_class[c].size()) + " samples, need " +
                              std::to_string(need));
        }
    }
    std::vector<Episode> episodes;
    episodes.reserve(cfg.batches);
    for (int b = 0; b < cfg.batches; ++b) {
        Prng rng(derive_seed(cfg.seed, "episode/" + std::to_string(b)));
        Episode ep;
        for (auto ci : rng.sample_indices(ds.classes(), ways)) {
            const int c = static_cast<int>(ci);
            ep.class_map.push_back(ds.labels[c]);
            const auto picks = rng.sample_indices(ds.by_class[c].size(), need);
            std::vector<FeatureVector> support;
            for (int i = 0; i < cfg.few_shot.shots; ++i) {
                support.push_back(ds.samples[ds.by_class[c][picks[i]]].features);
            }
            ep.support.push_back(std::move(support));
            const int episode_class = static_cast<int>(ep.support.size()) - 1;
            for (int q = 0; q < cfg.queries_per_class; ++q) {
                ep.queries.emplace_back(
                    ds.samples[ds.by_class[c][picks[cfg.few_shot.shots + q]]].features,
                    episode_class);
            }
        }
        episodes.push_back(std::move(ep));
    }
    return episodes;
}

/// Fraction of queries both correct and certified at level T (the certified
/// accuracy curve's value at T).
inline double certified_accuracy(const std::vector<QueryCertRecord>& records, int level) {
    if (records.empty()) throw input_error("certified_accuracy: no records");
    int hits = 0;
    for (const auto& r : records) {
        if (r.correct && r.certified_size >= level) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

struct CurvePoint {
    Method method;
    AttackModel model;
    int budget = 0;
    std::optional<double> certified;   // FCert only
    double empirical = 0.0;
};

struct QueryRecord {
    int episode = 0;
    int query = 0;
    int truth = 0;
    std::vector<std::pair<Method, int>> predicted;   // clean predictions
    int certified_individual = 0;                    // FCert certificates
    int certified_group = 0;
    bool fcert_correct = false;
};

struct EvalReport {
    EvalConfig config;
    std::vector<QueryRecord> records;
    std::vector<CurvePoint> curves;
};

namespace eval_detail {

inline int predict(Method m, const Episode& ep, const FeatureVector& q, const EvalConfig& cfg) {
    switch (m) {
        case Method::FCert: return fcert_predict(ep, q, cfg.few_shot);
        case Method::FCertWeighted: return fcert_predict_weighted(ep, q, cfg.few_shot);
        case Method::ProtoNet: return protonet_predict(ep, q, cfg.few_shot);
        case Method::KNN: return knn_predict(ep, q, cfg.knn_k, cfg.few_shot);
    }
    throw input_error("unknown method");
}

} // namespace eval_detail

/// Full benchmark: clean predictions for every method, FCert certification
/// under both attack models, and empirical accuracy after simulated attacks
/// at every budget on the [0, K'] grid.
inline EvalReport run_benchmark(const FeatureDataset& ds, const EvalConfig& cfg) {
    EvalReport report;
    report.config = cfg;
    const auto episodes = sample_episodes(ds, cfg);
    const int trim = cfg.few_shot.trim;

    // (method, model, T) -> hit counts, keyed by position in the curve grid.
    const int n_methods = static_cast<int>(cfg.methods.size());
    const int n_models = static_cast<int>(cfg.attack_models.size());
    std::vector<int> hits(static_cast<std::size_t>(n_methods) * n_models * (trim + 1), 0);
    const auto slot = [&](int mi, int ai, int t) {
        return (static_cast<std::size_t>(mi) * n_models + ai) * (trim + 1) + t;
    };

    std::vector<QueryCertRecord> cert_individual, cert_group;
    int total_queries = 0;

    for (int e = 0; e < static_cast<int>(episodes.size()); ++e) {
        const Episode& ep = episodes[e];
        for (int qi = 0; qi < static_cast<int>(ep.queries.size()); ++qi) {
            const auto& [query, truth] = ep.queries[qi];
            ++total_queries;

            QueryRecord rec;
            rec.episode = e;
            rec.query = qi;
            rec.truth = truth;
            for (Method m : cfg.methods) {
                rec.predicted.emplace_back(m, eval_detail::predict(m, ep, query, cfg));
            }

            const ClassDistances d = class_distances(ep, query, cfg.few_shot);
            const int fcert_label = robust_score(d, cfg.few_shot).argmin();
            rec.fcert_correct = fcert_label == truth;
            const CertResult ci = certify_individual(d, fcert_label, cfg.few_shot);
            const CertResult cg = certify_group(d, fcert_label, cfg.few_shot);
            rec.certified_individual = ci.certified_size;
            rec.certified_group = cg.certified_size;
            cert_individual.push_back({fcert_label, rec.fcert_correct, ci.certified_size});
            cert_group.push_back({fcert_label, rec.fcert_correct, cg.certified_size});
            report.records.push_back(rec);

            for (int ai = 0; ai < n_models; ++ai) {
                const AttackModel model = cfg.attack_models[ai];
                for (int t = 0; t <= trim; ++t) {
                    AttackSpec spec;
                    spec.model = model;
                    spec.budget = t;
                    spec.strategy = cfg.strategy;
                    spec.rng_seed = derive_seed(
                        cfg.seed, "attack/" + to_string(model) + "/" + std::to_string(e) + "/" +
                                      std::to_string(qi) + "/" + std::to_string(t));
                    const Episode poisoned =
                        model == AttackModel::Individual
                            ? attack_individual(ep, query, truth, spec, cfg.few_shot)
                            : attack_group(ep, query, truth, spec, cfg.few_shot);
                    for (int mi = 0; mi < n_methods; ++mi) {
                        if (eval_detail::predict(cfg.methods[mi], poisoned, query, cfg) == truth) {
                            ++hits[slot(mi, ai, t)];
                        }
                    }
                }
            }
        }
    }

    for (int mi = 0; mi < n_methods; ++mi) {
        for (int ai = 0; ai < n_models; ++ai) {
            for (int t = 0; t <= trim; ++t) {
                CurvePoint p;
                p.method = cfg.methods[mi];
                p.model = cfg.attack_models[ai];
                p.budget = t;
                p.empirical = static_cast<double>(hits[slot(mi, ai, t)]) / total_queries;
                if (cfg.methods[mi] == Method::FCert) {
                    const auto& cert = cfg.attack_models[ai] == AttackModel::Individual
                                           ? cert_individual
                                           : cert_group;
                    p.certified = certified_accuracy(cert, t);
                }
                report.curves.push_back(p);
            }
        }
    }
    return report;
}

inline void save_report_csv(const EvalReport& report, std::ostream& out) {
    out << "method,attack_model,T,certified_accuracy,empirical_accuracy\n";
    out << std::setprecision(17);
    for (const auto& p : report.curves) {
        out << to_string(p.method) << "," << to_string(p.model) << "," << p.budget << ",";
        if (p.certified) out << *p.certified;
        out << "," << p.empirical << "\n";
    }
}

inline nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    const EvalConfig& c = report.config;
    j["config"] = {
        {"batches", c.batches},
        {"ways", c.few_shot.ways},
        {"shots", c.few_shot.shots},
        {"trim", c.few_shot.trim},
        {"metric", to_string(c.few_shot.metric)},
        {"queries_per_class", c.queries_per_class},
        {"seed", c.seed},
        {"strategy", to_string(c.strategy)},
        {"knn_k", c.knn_k},
    };
    {
        nlohmann::ordered_json methods = nlohmann::ordered_json::array();
        for (Method m : c.methods) methods.push_back(to_string(m));
        j["config"]["methods"] = methods;
        nlohmann::ordered_json models = nlohmann::ordered_json::array();
        for (AttackModel m : c.attack_models) models.push_back(to_string(m));
        j["config"]["attack_models"] = models;
    }
    j["records"] = nlohmann::ordered_json::array();
    for (const auto& r : report.records) {
        nlohmann::ordered_json jr;
        jr["episode"] = r.episode;
        jr["query"] = r.query;
        jr["truth"] = r.truth;
        jr["predicted"] = nlohmann::ordered_json::object();
        for (const auto& [m, label] : r.predicted) jr["predicted"][to_string(m)] = label;
        jr["certified_individual"] = r.certified_individual;
        jr["certified_group"] = r.certified_group;
        jr["fcert_correct"] = r.fcert_correct;
        j["records"].push_back(jr);
    }
    j["curves"] = nlohmann::ordered_json::array();
    for (const auto& p : report.curves) {
        nlohmann::ordered_json jp;
        jp["method"] = to_string(p.method);
        jp["attack_model"] = to_string(p.model);
        jp["T"] = p.budget;
        if (p.certified) {
            jp["certified_accuracy"] = *p.certified;
        } else {
            jp["certified_accuracy"] = nullptr;
        }
        jp["empirical_accuracy"] = p.empirical;
        j["curves"].push_back(jp);
    }
    return j;
}

inline void save_report(const EvalReport& report, const std::string& path,
                        const std::string& format) {
    std::ofstream out(path);
    if (!out) throw data_error(path + ": cannot open for writing");
    if (format == "csv") {
        save_report_csv(report, out);
    } else if (format == "json") {
        out << report_to_json(report).dump(2) << "\n";
    } else {
        throw input_error("save_report: format must be csv or json");
    }
}

} // namespace fcert

#endif
