#ifndef FCERT_ORACLE_HPP
#define FCERT_ORACLE_HPP

#include <algorithm>
#include <utility>
#include <vector>

#include "fcert/classify.hpp"
#include "fcert/types.hpp"

namespace fcert {

/// Size limits and tolerance for the brute-force enumerations. The candidate
/// replacement set for a distance tuple d is {0} ∪ {d_i} ∪ {d_K + 1}: both
/// extremes plus every interior pivot.
struct OracleConfig {
    int max_shots = 8;
    int max_ways = 4;
    double tolerance = 1e-9;
};

namespace oracle_detail {

inline std::vector<double> candidate_values(const std::vector<double>& d) {
    std::vector<double> vals;
    vals.reserve(d.size() + 2);
    vals.push_back(0.0);
    vals.insert(vals.end(), d.begin(), d.end());
    vals.push_back(d.back() + 1.0);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals;
}

// Visit the trimmed mean of every tuple reachable by replacing at most
// `budget` positions of `d` with values from `candidates`. Positions are
// enumerated as lexicographic index subsets, value assignments as a
// mixed-radix counter.
template <typename Visitor>
void enumerate_attacks(const std::vector<double>& d, int budget, int trim,
                       const std::vector<double>& candidates, Visitor&& visit) {
    const int k = static_cast<int>(d.size());
    const int n_vals = static_cast<int>(candidates.size());
    std::vector<int> subset;
    std::vector<double> work(d.size());

    const auto evaluate_subset = [&]() {
        const int m = static_cast<int>(subset.size());
        std::vector<int> radix(m, 0);
        while (true) {
            std::copy(d.begin(), d.end(), work.begin());
            for (int j = 0; j < m; ++j) work[subset[j]] = candidates[radix[j]];
            std::sort(work.begin(), work.end());
            visit(trimmed_mean(work, trim));
            int pos = m - 1;
            while (pos >= 0 && radix[pos] == n_vals - 1) {
                radix[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++radix[pos];
        }
    };

    // All subsets of size 0..budget, lexicographic.
    const auto recurse = [&](auto&& self, int start) -> void {
        evaluate_subset();
        if (static_cast<int>(subset.size()) == budget) return;
        for (int i = start; i < k; ++i) {
            subset.push_back(i);
            self(self, i + 1);
            subset.pop_back();
        }
    };
    recurse(recurse, 0);
}

} // namespace oracle_detail

/// Exact max and min robust distance achievable by replacing at most `budget`
/// of the K distances, found by exhaustive enumeration.
inline std::pair<double, double> oracle_bound_extrema(const std::vector<double>& d, int budget,
                                                      int trim, const OracleConfig& cfg = {}) {
    const int k = static_cast<int>(d.size());
    if (k > cfg.max_shots) {
        throw input_error("oracle_bound_extrema: K exceeds the enumeration limit");
    }
    if (budget < 0 || budget > trim || trim > (k - 1) / 2) {
        throw input_error("oracle_bound_extrema: need 0 <= T <= K' <= floor((K-1)/2)");
    }
    double hi = trimmed_mean(d, trim);
    double lo = hi;
    const auto candidates = oracle_detail::candidate_values(d);
    oracle_detail::enumerate_attacks(d, budget, trim, candidates, [&](double r) {
        hi = std::max(hi, r);
        lo = std::min(lo, r);
    });
    return {hi, lo};
}

/// Certified poisoning size by exhaustive attack search: the smallest total
/// budget whose enumerated attacks flip (or tie) the argmin, minus one;
/// capped at K' when nothing within [0, K'] flips.
inline int oracle_certified_size(const ClassDistances& d, int predicted,
                                 const FewShotConfig& fs, AttackModel model,
                                 const OracleConfig& cfg = {}) {
    fs.validate();
    if (d.ways() > cfg.max_ways || fs.shots > cfg.max_shots) {
        throw input_error("oracle_certified_size: instance exceeds enumeration limits");
    }
    const int ways = d.ways();

    // Per-class attack reach at each budget, from pure enumeration. An attack
    // on one class only moves that class's robust distance, so the joint
    // optimum factorizes into per-class extrema.
    std::vector<std::vector<double>> reach_hi(ways), reach_lo(ways);
    for (int c = 0; c < ways; ++c) {
        reach_hi[c].resize(fs.trim + 1);
        reach_lo[c].resize(fs.trim + 1);
        for (int t = 0; t <= fs.trim; ++t) {
            const auto [hi, lo] = oracle_bound_extrema(d.per_class[c], t, fs.trim, cfg);
            reach_hi[c][t] = hi;
            reach_lo[c][t] = lo;
        }
    }

    const auto flips_at = [&](int total) {
        if (model == AttackModel::Individual) {
            for (int c = 0; c < ways; ++c) {
                if (c == predicted) continue;
                if (reach_lo[c][total] <= reach_hi[predicted][total]) return true;
            }
            return false;
        }
        for (int own = 0; own <= total; ++own) {
            for (int c = 0; c < ways; ++c) {
                if (c == predicted) continue;
                if (reach_lo[c][total - own] <= reach_hi[predicted][own]) return true;
            }
        }
        return false;
    };

    for (int total = 0; total <= fs.trim; ++total) {
        if (flips_at(total)) return total == 0 ? 0 : total - 1;
    }
    return fs.trim;
}

} // namespace fcert

#endif
