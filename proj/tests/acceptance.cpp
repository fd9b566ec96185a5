// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. argv[1] is the path to the fcert CLI binary.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "fcert/fcert.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using namespace fcert;
using fcert::testing::random_episode;
using fcert::testing::random_instance;
using fcert::testing::random_sorted_distances;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << criterion << ": " << name;
    if (!ok && !detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++g_failures;
}

std::string g_cli;
fs::path g_tmp;

int run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args;
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

FewShotConfig make_cfg(int ways, int shots, int trim) {
    FewShotConfig cfg;
    cfg.ways = ways;
    cfg.shots = shots;
    cfg.trim = trim;
    return cfg;
}

// 1. Worked five-distance example: upper bound 4 exactly.
void criterion_example() {
    const bool ok = upper_bound({1, 2, 3, 4, 5}, 1, 1) == 4.0;
    report(1, "worked example upper bound equals 4", ok);
}

// 2. Analytic bounds equal brute-force extrema on 2000 random instances.
void criterion_bound_oracle() {
    Prng rng(1001);
    std::string detail;
    bool ok = true;
    for (int i = 0; i < 2000 && ok; ++i) {
        const int shots = 3 + static_cast<int>(rng.next_below(6));   // K in [3, 8]
        const auto d = random_sorted_distances(rng, shots);
        for (int trim = 0; trim <= (shots - 1) / 2 && ok; ++trim) {
            for (int t = 0; t <= trim && ok; ++t) {
                const auto [hi, lo] = oracle_bound_extrema(d, t, trim);
                if (std::abs(hi - upper_bound(d, t, trim)) > 1e-9 ||
                    std::abs(lo - lower_bound(d, t, trim)) > 1e-9) {
                    ok = false;
                    detail = "instance " + std::to_string(i);
                }
            }
        }
    }
    report(2, "bounds match brute-force oracle on 2000 instances", ok, detail);
}

// 3. Certified sizes equal the exhaustive search on 500 instances.
void criterion_cert_oracle() {
    Prng rng(1002);
    std::string detail;
    bool ok = true;
    for (int i = 0; i < 500 && ok; ++i) {
        const int ways = 2 + static_cast<int>(rng.next_below(3));
        const int shots = 3 + static_cast<int>(rng.next_below(5));   // K in [3, 7]
        const int trim = static_cast<int>(rng.next_below((shots - 1) / 2 + 1));
        const auto cfg = make_cfg(ways, shots, trim);
        const auto d = random_instance(rng, ways, shots);
        const int predicted = robust_score(d, cfg).argmin();
        if (certify_individual(d, predicted, cfg).certified_size !=
                oracle_certified_size(d, predicted, cfg, AttackModel::Individual) ||
            certify_group(d, predicted, cfg).certified_size !=
                oracle_certified_size(d, predicted, cfg, AttackModel::Group)) {
            ok = false;
            detail = "instance " + std::to_string(i);
        }
    }
    report(3, "certificates match brute-force oracle on 500 instances", ok, detail);
}

// 4. Soundness below T*, flip at T*+1, on 1000 random instances.
void criterion_sound_tight() {
    Prng rng(1003);
    std::string detail;
    bool ok = true;
    for (int i = 0; i < 1000 && ok; ++i) {
        const int ways = 2 + static_cast<int>(rng.next_below(3));
        const int shots = 5 + static_cast<int>(rng.next_below(3));   // K in [5, 7]
        const int trim = (shots - 1) / 2;
        const auto cfg = make_cfg(ways, shots, trim);
        const auto d = random_instance(rng, ways, shots);
        const int predicted = robust_score(d, cfg).argmin();
        for (auto model : {AttackModel::Individual, AttackModel::Group}) {
            const int certified = model == AttackModel::Individual
                                      ? certify_individual(d, predicted, cfg).certified_size
                                      : certify_group(d, predicted, cfg).certified_size;
            // No enumerated attack within the certificate flips the label.
            if (oracle_certified_size(d, predicted, cfg, model) < certified) {
                ok = false;
                detail = "soundness, instance " + std::to_string(i);
                break;
            }
            for (int t = 0; t <= certified; ++t) {
                if (empirical_flip_check(d, predicted, cfg, model, t)) {
                    ok = false;
                    detail = "tightness attack broke a certificate, instance " +
                             std::to_string(i);
                    break;
                }
            }
            if (ok && certified + 1 <= trim &&
                !empirical_flip_check(d, predicted, cfg, model, certified + 1)) {
                ok = false;
                detail = "no flip at T*+1, instance " + std::to_string(i);
            }
            if (!ok) break;
        }
    }
    report(4, "soundness below T* and flip at T*+1 on 1000 instances", ok, detail);
}

// 5. Certified curves monotone, empirical never below certified.
void criterion_monotone_curves() {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : {11ULL, 29ULL, 43ULL}) {
        const auto ds = synth_gaussian(6, 12, 8, 2.0, 1.5, seed);
        EvalConfig cfg;
        cfg.batches = 6;
        cfg.few_shot = make_cfg(4, 5, 2);
        cfg.seed = seed;
        cfg.knn_k = 5;
        const auto report_data = run_benchmark(ds, cfg);
        std::map<std::string, std::vector<const CurvePoint*>> curves;
        for (const auto& p : report_data.curves) {
            if (p.method == Method::FCert) curves[to_string(p.model)].push_back(&p);
        }
        for (const auto& [model, points] : curves) {
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (!points[i]->certified || points[i]->empirical < *points[i]->certified) {
                    ok = false;
                    detail = "empirical < certified, model " + model;
                }
                if (i > 0 && *points[i]->certified > *points[i - 1]->certified) {
                    ok = false;
                    detail = "non-monotone certified curve, model " + model;
                }
            }
        }
    }
    report(5, "certified curves monotone and dominated by empirical", ok, detail);
}

// 6. CLI end-to-end on the separable synthetic dataset.
void criterion_end_to_end() {
    const fs::path data = g_tmp / "d.jsonl";
    const fs::path out = g_tmp / "r.csv";
    bool ok = run_cli("synth --classes 5 --per-class 20 --dim 16 --separation 10 --sigma 0.1"
                      " --seed 7 --output " + data.string()) == 0;
    ok = ok && run_cli("eval --dataset " + data.string() + " --seed 7 --output " +
                       out.string()) == 0;
    std::string detail = "CLI invocation failed";
    if (ok) {
        std::istringstream lines(slurp(out));
        std::string line;
        std::getline(lines, line);   // header
        int certified_rows = 0;
        while (std::getline(lines, line)) {
            std::istringstream row(line);
            std::string method, model, t, certified, empirical;
            std::getline(row, method, ',');
            std::getline(row, model, ',');
            std::getline(row, t, ',');
            std::getline(row, certified, ',');
            std::getline(row, empirical, ',');
            if (method == "fcert") {
                ++certified_rows;
                if (certified.empty() || std::stod(certified) != 1.0) {
                    ok = false;
                    detail = "certified accuracy below 1.0 at T=" + t;
                }
            }
        }
        if (certified_rows != 6) {
            ok = false;
            detail = "expected 6 fcert rows (2 models x T in [0,2])";
        }
    }
    report(6, "separable end-to-end run certifies at 1.0 for all T <= K'", ok, detail);
}

// 7. Invariance properties on 200 random episodes each.
void criterion_invariance() {
    Prng rng(1007);
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 200 && ok; ++i) {
        const int ways = 2 + static_cast<int>(rng.next_below(3));
        const auto cfg = make_cfg(ways, 5, 2);
        Episode ep = random_episode(rng, ways, 5, 1, 4, 3.0, 2.0);
        const auto& query = ep.queries.front().first;
        const int base = fcert_predict(ep, query, cfg);

        Episode shuffled = ep;
        for (auto& cls : shuffled.support) {
            for (std::size_t j = cls.size(); j > 1; --j) {
                std::swap(cls[j - 1], cls[rng.next_below(j)]);
            }
        }
        if (fcert_predict(shuffled, query, cfg) != base) {
            ok = false;
            detail = "permutation, instance " + std::to_string(i);
        }

        Episode rotated = ep;
        std::rotate(rotated.support.begin(), rotated.support.begin() + 1,
                    rotated.support.end());
        if (ok && (fcert_predict(rotated, query, cfg) + 1) % ways != base) {
            ok = false;
            detail = "relabeling, instance " + std::to_string(i);
        }
    }
    for (int i = 0; i < 200 && ok; ++i) {
        const auto cfg = make_cfg(3, 5, 2);
        const Episode ep = random_episode(rng, 3, 5, 1, 4, 3.0, 2.0);
        const auto& query = ep.queries.front().first;
        const int base = fcert_predict(ep, query, cfg);
        for (double scale : {1e-3, 1.0, 1e3}) {
            Episode scaled = ep;
            FeatureVector sq = query;
            for (auto& cls : scaled.support) {
                for (auto& x : cls) {
                    for (double& v : x) v *= scale;
                }
            }
            for (double& v : sq) v *= scale;
            if (fcert_predict(scaled, sq, cfg) != base) {
                ok = false;
                detail = "scale " + std::to_string(scale) + ", instance " + std::to_string(i);
            }
        }
    }
    for (int i = 0; i < 200 && ok; ++i) {
        // All classes share one support set: the tie must resolve to class 0.
        const auto cfg = make_cfg(3, 5, 2);
        Episode ep = random_episode(rng, 3, 5, 1, 4, 3.0, 2.0);
        ep.support[1] = ep.support[0];
        ep.support[2] = ep.support[0];
        if (fcert_predict(ep, ep.queries.front().first, cfg) != 0) {
            ok = false;
            detail = "tie-break, instance " + std::to_string(i);
        }
    }
    report(7, "permutation, scale and tie-break invariance on 200 episodes each", ok, detail);
}

// 8. Byte-identical reruns; SplitMix64 matches an independent reimplementation.
void criterion_reproducibility() {
    bool ok = true;
    std::string detail;
    const fs::path d1 = g_tmp / "rep1.jsonl", d2 = g_tmp / "rep2.jsonl";
    const fs::path r1 = g_tmp / "rep1.csv", r2 = g_tmp / "rep2.csv";
    const fs::path c1 = g_tmp / "rep1_cert.csv", c2 = g_tmp / "rep2_cert.csv";
    ok = run_cli("synth --classes 4 --per-class 10 --dim 8 --separation 5 --sigma 1.0 --seed 3"
                 " --output " + d1.string()) == 0 &&
         run_cli("synth --classes 4 --per-class 10 --dim 8 --separation 5 --sigma 1.0 --seed 3"
                 " --output " + d2.string()) == 0;
    ok = ok && slurp(d1) == slurp(d2);
    if (!ok) detail = "synth output differs between runs";
    if (ok) {
        const std::string common = " --dataset " + d1.string() +
                                   " --ways 4 --shots 5 --batches 4 --seed 9 --output ";
        ok = run_cli("eval" + common + r1.string()) == 0 &&
             run_cli("eval" + common + r2.string()) == 0 && slurp(r1) == slurp(r2) &&
             run_cli("certify" + common + c1.string()) == 0 &&
             run_cli("certify" + common + c2.string()) == 0 && slurp(c1) == slurp(c2);
        if (!ok) detail = "eval/certify output differs between runs";
    }
    if (ok) {
        for (std::uint64_t seed : {std::uint64_t{0}, std::uint64_t{1}, std::uint64_t{1} << 63}) {
            Prng rng(seed);
            std::uint64_t state = seed;
            for (int i = 0; i < 32; ++i) {
                // Independent restatement of the generator's constants.
                state += 0x9E3779B97F4A7C15ULL;
                std::uint64_t z = state;
                z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
                z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
                z ^= z >> 31;
                if (rng.next_u64() != z) {
                    ok = false;
                    detail = "generator diverges at seed " + std::to_string(seed);
                }
            }
        }
    }
    report(8, "byte-identical reruns and reference generator stream", ok, detail);
}

// 9. Dataset-only invocation uses the documented defaults.
void criterion_defaults() {
    const fs::path data = g_tmp / "defaults.jsonl";
    const fs::path out = g_tmp / "defaults.json";
    bool ok = run_cli("synth --classes 6 --per-class 10 --dim 8 --separation 10 --sigma 0.2"
                      " --seed 5 --output " + data.string()) == 0;
    ok = ok && run_cli("eval --dataset " + data.string() + " --format json --output " +
                       out.string()) == 0;
    std::string detail = "CLI invocation failed";
    if (ok) {
        const auto j = nlohmann::json::parse(slurp(out));
        const auto& c = j["config"];
        ok = c["ways"] == 5 && c["shots"] == 5 && c["trim"] == 2 && c["metric"] == "sq-l2" &&
             c["batches"] == 20;
        if (!ok) detail = "config echo: " + c.dump();
    }
    report(9, "dataset-only run uses C=5, K=5, K'=2, sq-l2, 20 batches", ok, detail);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-fcert-cli>\n";
        return 2;
    }
    g_cli = argv[1];
    g_tmp = fs::temp_directory_path() / ("fcert_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(g_tmp);

    criterion_example();
    criterion_bound_oracle();
    criterion_cert_oracle();
    criterion_sound_tight();
    criterion_monotone_curves();
    criterion_end_to_end();
    criterion_invariance();
    criterion_reproducibility();
    criterion_defaults();

    fs::remove_all(g_tmp);
    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) +
                                                                " criteria failed")
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
