// fcert: robust few-shot prediction, poisoning certification, attack
// simulation and brute-force self-checks, driven from the command line.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "fcert/fcert.hpp"

namespace {

using namespace fcert;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitOracleMismatch = 3;

DistanceMetric parse_metric(const std::string& name) {
    if (name == "sq-l2") return DistanceMetric::SquaredL2;
    if (name == "l2") return DistanceMetric::L2;
    if (name == "cosine") return DistanceMetric::CosineDistance;
    throw input_error("--metric must be one of sq-l2, l2, cosine");
}

AttackStrategy parse_strategy(const std::string& name) {
    if (name == "collision") return AttackStrategy::Collision;
    if (name == "cross-class") return AttackStrategy::CrossClass;
    if (name == "far-point") return AttackStrategy::FarPoint;
    throw input_error("--strategy must be one of collision, cross-class, far-point");
}

Method parse_method(const std::string& name) {
    if (name == "fcert") return Method::FCert;
    if (name == "fcert-weighted") return Method::FCertWeighted;
    if (name == "protonet") return Method::ProtoNet;
    if (name == "knn") return Method::KNN;
    throw input_error("--methods entries must be fcert, fcert-weighted, protonet or knn");
}

std::vector<AttackModel> parse_attack(const std::string& name) {
    if (name == "individual") return {AttackModel::Individual};
    if (name == "group") return {AttackModel::Group};
    if (name == "both") return {AttackModel::Individual, AttackModel::Group};
    throw input_error("--attack must be one of individual, group, both");
}

// Flags shared by the episode-driven subcommands.
struct CommonOpts {
    std::string dataset;
    int ways = 5;
    int shots = 5;
    int kprime = -1;   // -1: floor((K-1)/2)
    std::string metric = "sq-l2";
    std::uint64_t seed = 0;
    std::string output;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_dataset = true) {
    auto* ds = cmd->add_option("--dataset", o.dataset, "JSONL feature dataset");
    if (needs_dataset) ds->required();
    cmd->add_option("--ways", o.ways, "classes per episode (C)");
    cmd->add_option("--shots", o.shots, "support samples per class (K)");
    cmd->add_option("--kprime", o.kprime, "trimming depth K' (default floor((K-1)/2))");
    cmd->add_option("--metric", o.metric, "distance metric: sq-l2, l2, cosine");
    cmd->add_option("--seed", o.seed, "root random seed");
    cmd->add_option("--output", o.output, "output file (default: stdout)");
    cmd->add_option("--format", o.format, "output format: csv or json");
}

FewShotConfig few_shot_from(const CommonOpts& o) {
    FewShotConfig fs;
    fs.ways = o.ways;
    fs.shots = o.shots;
    fs.trim = o.kprime < 0 ? (o.shots - 1) / 2 : o.kprime;
    fs.metric = parse_metric(o.metric);
    if (fs.trim > (fs.shots - 1) / 2) {
        throw input_error("--kprime must satisfy K' <= floor((K-1)/2) = " +
                          std::to_string((fs.shots - 1) / 2));
    }
    fs.validate();
    return fs;
}

// Stream that is either stdout or a file, picked by --output.
class OutputSink {
public:
    explicit OutputSink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw data_error(path + ": cannot open for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

struct PredictionRow {
    int episode;
    int query;
    int truth;
    Method method;
    int predicted;
};

void write_prediction_rows(const std::vector<PredictionRow>& rows, const std::string& format,
                           std::ostream& out) {
    if (format == "csv") {
        out << "episode,query,truth,method,predicted,correct\n";
        for (const auto& r : rows) {
            out << r.episode << "," << r.query << "," << r.truth << "," << to_string(r.method)
                << "," << r.predicted << "," << (r.predicted == r.truth ? 1 : 0) << "\n";
        }
    } else if (format == "json") {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            j.push_back({{"episode", r.episode},
                         {"query", r.query},
                         {"truth", r.truth},
                         {"method", to_string(r.method)},
                         {"predicted", r.predicted},
                         {"correct", r.predicted == r.truth}});
        }
        out << j.dump(2) << "\n";
    } else {
        throw input_error("--format must be csv or json");
    }
}

int run_predict(const CommonOpts& common, int batches, const std::vector<std::string>& methods) {
    const FewShotConfig fs = few_shot_from(common);
    const FeatureDataset ds = load_dataset(common.dataset);
    EvalConfig cfg;
    cfg.few_shot = fs;
    cfg.batches = batches;
    cfg.seed = common.seed;
    cfg.knn_k = fs.shots;
    if (!methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : methods) cfg.methods.push_back(parse_method(m));
    }
    const auto episodes = sample_episodes(ds, cfg);
    std::vector<PredictionRow> rows;
    for (int e = 0; e < static_cast<int>(episodes.size()); ++e) {
        const Episode& ep = episodes[e];
        for (int qi = 0; qi < static_cast<int>(ep.queries.size()); ++qi) {
            const auto& [query, truth] = ep.queries[qi];
            for (Method m : cfg.methods) {
                int predicted = 0;
                switch (m) {
                    case Method::FCert: predicted = fcert_predict(ep, query, fs); break;
                    case Method::FCertWeighted:
                        predicted = fcert_predict_weighted(ep, query, fs);
                        break;
                    case Method::ProtoNet: predicted = protonet_predict(ep, query, fs); break;
                    case Method::KNN: predicted = knn_predict(ep, query, cfg.knn_k, fs); break;
                }
                rows.push_back({e, qi, truth, m, predicted});
            }
        }
    }
    OutputSink sink(common.output);
    write_prediction_rows(rows, common.format, sink.stream());
    return kExitOk;
}

int run_certify(const CommonOpts& common, int batches) {
    const FewShotConfig fs = few_shot_from(common);
    const FeatureDataset ds = load_dataset(common.dataset);
    EvalConfig cfg;
    cfg.few_shot = fs;
    cfg.batches = batches;
    cfg.seed = common.seed;
    const auto episodes = sample_episodes(ds, cfg);

    OutputSink sink(common.output);
    std::ostream& out = sink.stream();
    if (common.format == "csv") {
        out << "episode,query,truth,predicted,correct,certified_individual,certified_group\n";
    }
    nlohmann::ordered_json jrows = nlohmann::ordered_json::array();
    for (int e = 0; e < static_cast<int>(episodes.size()); ++e) {
        const Episode& ep = episodes[e];
        for (int qi = 0; qi < static_cast<int>(ep.queries.size()); ++qi) {
            const auto& [query, truth] = ep.queries[qi];
            const ClassDistances d = class_distances(ep, query, fs);
            const int predicted = robust_score(d, fs).argmin();
            const CertResult ci = certify_individual(d, predicted, fs);
            const CertResult cg = certify_group(d, predicted, fs);
            if (common.format == "csv") {
                out << e << "," << qi << "," << truth << "," << predicted << ","
                    << (predicted == truth ? 1 : 0) << "," << ci.certified_size << ","
                    << cg.certified_size << "\n";
            } else {
                jrows.push_back({{"episode", e},
                                 {"query", qi},
                                 {"truth", truth},
                                 {"predicted", predicted},
                                 {"correct", predicted == truth},
                                 {"certified_individual", ci.certified_size},
                                 {"certified_group", cg.certified_size}});
            }
        }
    }
    if (common.format == "json") {
        out << jrows.dump(2) << "\n";
    } else if (common.format != "csv") {
        throw input_error("--format must be csv or json");
    }
    return kExitOk;
}

int run_eval(const CommonOpts& common, int batches, const std::string& attack,
             const std::string& strategy, const std::vector<std::string>& methods) {
    const FewShotConfig fs = few_shot_from(common);
    const FeatureDataset ds = load_dataset(common.dataset);
    EvalConfig cfg;
    cfg.few_shot = fs;
    cfg.batches = batches;
    cfg.seed = common.seed;
    cfg.knn_k = fs.shots;
    cfg.attack_models = parse_attack(attack);
    cfg.strategy = parse_strategy(strategy);
    if (!methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : methods) cfg.methods.push_back(parse_method(m));
    }
    const EvalReport report = run_benchmark(ds, cfg);
    if (common.output.empty()) {
        if (common.format == "csv") {
            save_report_csv(report, std::cout);
        } else {
            std::cout << report_to_json(report).dump(2) << "\n";
        }
    } else {
        save_report(report, common.output, common.format);
    }
    return kExitOk;
}

int run_attack(const CommonOpts& common, int batches, const std::string& attack,
               const std::string& strategy, int budget) {
    const FewShotConfig fs = few_shot_from(common);
    const FeatureDataset ds = load_dataset(common.dataset);
    const auto models = parse_attack(attack);
    if (models.size() != 1) {
        throw input_error("attack: --attack must be individual or group");
    }
    if (budget < 0 || budget > fs.shots) {
        throw input_error("--budget must be in [0, K]");
    }
    EvalConfig cfg;
    cfg.few_shot = fs;
    cfg.batches = batches;
    cfg.seed = common.seed;
    cfg.knn_k = fs.shots;
    const auto episodes = sample_episodes(ds, cfg);
    std::vector<PredictionRow> rows;
    for (int e = 0; e < static_cast<int>(episodes.size()); ++e) {
        const Episode& ep = episodes[e];
        for (int qi = 0; qi < static_cast<int>(ep.queries.size()); ++qi) {
            const auto& [query, truth] = ep.queries[qi];
            AttackSpec spec;
            spec.model = models.front();
            spec.budget = budget;
            spec.strategy = parse_strategy(strategy);
            spec.rng_seed = derive_seed(common.seed, "attack/" + to_string(spec.model) + "/" +
                                                         std::to_string(e) + "/" +
                                                         std::to_string(qi) + "/" +
                                                         std::to_string(budget));
            const Episode poisoned = spec.model == AttackModel::Individual
                                         ? attack_individual(ep, query, truth, spec, fs)
                                         : attack_group(ep, query, truth, spec, fs);
            for (Method m : cfg.methods) {
                int predicted = 0;
                switch (m) {
                    case Method::FCert: predicted = fcert_predict(poisoned, query, fs); break;
                    case Method::FCertWeighted:
                        predicted = fcert_predict_weighted(poisoned, query, fs);
                        break;
                    case Method::ProtoNet: predicted = protonet_predict(poisoned, query, fs); break;
                    case Method::KNN:
                        predicted = knn_predict(poisoned, query, cfg.knn_k, fs);
                        break;
                }
                rows.push_back({e, qi, truth, m, predicted});
            }
        }
    }
    OutputSink sink(common.output);
    write_prediction_rows(rows, common.format, sink.stream());
    return kExitOk;
}

int run_oracle_check(int max_k, int instances, std::uint64_t seed, const std::string& output) {
    if (max_k < 3 || max_k > 8) throw input_error("--max-k must be in [3, 8]");
    if (instances < 1) throw input_error("--instances must be positive");
    Prng rng(derive_seed(seed, "oracle-check"));
    OracleConfig oc;
    int disagreements = 0;
    std::ostringstream log;
    for (int i = 0; i < instances; ++i) {
        const int shots = 3 + static_cast<int>(rng.next_below(max_k - 2));
        const int max_trim = (shots - 1) / 2;
        const int trim = static_cast<int>(rng.next_below(max_trim + 1));
        const int ways = 2 + static_cast<int>(rng.next_below(3));
        FewShotConfig fs;
        fs.ways = ways;
        fs.shots = shots;
        fs.trim = trim;
        ClassDistances d;
        for (int c = 0; c < ways; ++c) {
            std::vector<double> cls(shots);
            for (double& v : cls) v = 10.0 * rng.next_unit();
            std::sort(cls.begin(), cls.end());
            d.per_class.push_back(std::move(cls));
        }
        for (int t = 0; t <= trim; ++t) {
            for (int c = 0; c < ways; ++c) {
                const auto [hi, lo] = oracle_bound_extrema(d.per_class[c], t, trim, oc);
                if (std::abs(hi - upper_bound(d.per_class[c], t, trim)) > oc.tolerance ||
                    std::abs(lo - lower_bound(d.per_class[c], t, trim)) > oc.tolerance) {
                    ++disagreements;
                    log << "bound mismatch: instance " << i << " class " << c << " T " << t
                        << "\n";
                }
            }
        }
        const int predicted = robust_score(d, fs).argmin();
        if (certify_individual(d, predicted, fs).certified_size !=
            oracle_certified_size(d, predicted, fs, AttackModel::Individual, oc)) {
            ++disagreements;
            log << "individual certificate mismatch: instance " << i << "\n";
        }
        if (certify_group(d, predicted, fs).certified_size !=
            oracle_certified_size(d, predicted, fs, AttackModel::Group, oc)) {
            ++disagreements;
            log << "group certificate mismatch: instance " << i << "\n";
        }
    }
    OutputSink sink(output);
    sink.stream() << log.str() << disagreements << " disagreements in " << instances
                  << " instances\n";
    return disagreements == 0 ? kExitOk : kExitOracleMismatch;
}

int run_synth(int classes, int per_class, int dim, double separation, double sigma,
              std::uint64_t seed, const std::string& output) {
    const FeatureDataset ds = synth_gaussian(classes, per_class, dim, separation, sigma, seed);
    if (output.empty()) {
        save_dataset(ds, std::cout);
    } else {
        save_dataset(ds, output);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FCert robust few-shot classification and poisoning certification"};
    app.require_subcommand(1);

    CommonOpts common;
    int batches = 20;
    std::vector<std::string> methods;
    std::string attack = "both";
    std::string strategy = "collision";
    int budget = 0;

    auto* predict = app.add_subcommand("predict", "clean predictions on sampled episodes");
    add_common(predict, common);
    predict->add_option("--batches", batches, "episode batches");
    predict->add_option("--methods", methods, "methods to run")->delimiter(',');

    auto* certify = app.add_subcommand("certify", "per-query certified poisoning sizes");
    add_common(certify, common);
    certify->add_option("--batches", batches, "episode batches");

    auto* eval = app.add_subcommand("eval", "certified and empirical accuracy benchmark");
    add_common(eval, common);
    eval->add_option("--batches", batches, "episode batches");
    eval->add_option("--attack", attack, "attack models: individual, group, both");
    eval->add_option("--strategy", strategy, "true-class strategy for the individual attack");
    eval->add_option("--methods", methods, "methods to run")->delimiter(',');

    auto* attack_cmd = app.add_subcommand("attack", "post-attack predictions at one budget");
    add_common(attack_cmd, common);
    attack_cmd->add_option("--batches", batches, "episode batches");
    attack_cmd->add_option("--attack", attack, "attack model: individual or group");
    attack_cmd->add_option("--strategy", strategy, "true-class strategy");
    attack_cmd->add_option("--budget", budget, "poisoning budget T")->required();

    int max_k = 7;
    int instances = 200;
    auto* oracle_cmd =
        app.add_subcommand("oracle-check", "brute-force verification of the certification math");
    oracle_cmd->add_option("--max-k", max_k, "largest K to enumerate");
    oracle_cmd->add_option("--instances", instances, "random instances to check");
    oracle_cmd->add_option("--seed", common.seed, "root random seed");
    oracle_cmd->add_option("--output", common.output, "output file (default: stdout)");

    int classes = 5, per_class = 20, dim = 16;
    double separation = 10.0, sigma = 0.1;
    auto* synth = app.add_subcommand("synth", "generate a synthetic Gaussian-cluster dataset");
    synth->add_option("--classes", classes, "number of classes");
    synth->add_option("--per-class", per_class, "samples per class");
    synth->add_option("--dim", dim, "feature dimension");
    synth->add_option("--separation", separation, "class-mean distance from the origin");
    synth->add_option("--sigma", sigma, "within-class noise");
    synth->add_option("--seed", common.seed, "root random seed");
    synth->add_option("--output", common.output, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
        if (predict->parsed()) return run_predict(common, batches, methods);
        if (certify->parsed()) return run_certify(common, batches);
        if (eval->parsed()) return run_eval(common, batches, attack, strategy, methods);
        if (attack_cmd->parsed()) return run_attack(common, batches, attack, strategy, budget);
        if (oracle_cmd->parsed()) {
            return run_oracle_check(max_k, instances, common.seed, common.output);
        }
        if (synth->parsed()) {
            return run_synth(classes, per_class, dim, separation, sigma, common.seed,
                             common.output);
        }
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    } catch (const fcert::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fcert::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
