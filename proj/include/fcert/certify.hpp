#ifndef FCERT_CERTIFY_HPP
#define FCERT_CERTIFY_HPP

#include <limits>
#include <vector>

#include "fcert/classify.hpp"
#include "fcert/types.hpp"

namespace fcert {

enum class AttackModel {
    Individual,   // up to T poisoned samples per class
    Group,        // up to T poisoned samples total
};

inline std::string to_string(AttackModel m) {
    return m == AttackModel::Individual ? "individual" : "group";
}

/// Worst-case robust distance of one class after the attacker replaces up to
/// T of its distances: the window slides up past the T evicted smallest.
inline double upper_bound(const std::vector<double>& d, int budget, int trim) {
    const int k = static_cast<int>(d.size());
    if (trim < 0 || trim > (k - 1) / 2) {
        throw input_error("upper_bound: invalid trim");
    }
    if (budget < 0 || budget > trim) {
        throw input_error("upper_bound: budget must be in [0, K'] (unbounded beyond)");
    }
    double s = 0.0;
    for (int i = trim + budget; i < k - trim + budget; ++i) s += d[i];
    return s / (k - 2 * trim);
}

/// Best-case (smallest) robust distance after the attacker replaces up to T
/// distances: the window slides down past the T evicted largest.
inline double lower_bound(const std::vector<double>& d, int budget, int trim) {
    const int k = static_cast<int>(d.size());
    if (trim < 0 || trim > (k - 1) / 2) {
        throw input_error("lower_bound: invalid trim");
    }
    if (budget < 0 || budget > trim) {
        throw input_error("lower_bound: budget must be in [0, K']");
    }
    double s = 0.0;
    for (int i = trim - budget; i < k - trim - budget; ++i) s += d[i];
    return s / (k - 2 * trim);
}

/// One row of the certification trace: the bounds that decide budget T.
struct CertTraceEntry {
    int budget = 0;                 // total poisoning budget T
    double predicted_upper = 0.0;   // worst case for the predicted class
    double rival_lower = 0.0;       // binding rival lower bound
    int rival_class = -1;           // the rival attaining it
    int predicted_budget = 0;       // binding split on the predicted class (Group)
    bool holds = false;             // strict inequality satisfied at this T
};

struct CertResult {
    int predicted = 0;
    int certified_size = 0;
    bool tie_at_zero = false;       // argmin not strict on clean distances
    std::vector<CertTraceEntry> trace;
};

namespace detail {

// Certification predicate for the Individual model at budget T, with the
// binding rival recorded in the trace entry.
inline CertTraceEntry individual_entry(const ClassDistances& d, int predicted,
                                       const FewShotConfig& cfg, int budget) {
    CertTraceEntry e;
    e.budget = budget;
    e.predicted_budget = budget;
    e.predicted_upper = upper_bound(d.per_class[predicted], budget, cfg.trim);
    e.rival_lower = std::numeric_limits<double>::infinity();
    for (int c = 0; c < d.ways(); ++c) {
        if (c == predicted) continue;
        const double lo = lower_bound(d.per_class[c], budget, cfg.trim);
        if (lo < e.rival_lower) {
            e.rival_lower = lo;
            e.rival_class = c;
        }
    }
    e.holds = e.predicted_upper < e.rival_lower;
    return e;
}

// Group predicate at total budget T: every split of the budget between the
// predicted class and any single rival must keep the inequality strict.
// Records the split with the smallest margin.
inline CertTraceEntry group_entry(const ClassDistances& d, int predicted,
                                  const FewShotConfig& cfg, int budget) {
    CertTraceEntry e;
    e.budget = budget;
    e.holds = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int own = 0; own <= budget; ++own) {
        const double up = upper_bound(d.per_class[predicted], own, cfg.trim);
        for (int c = 0; c < d.ways(); ++c) {
            if (c == predicted) continue;
            const double lo = lower_bound(d.per_class[c], budget - own, cfg.trim);
            const double margin = lo - up;
            if (margin < worst_margin) {
                worst_margin = margin;
                e.predicted_upper = up;
                e.rival_lower = lo;
                e.rival_class = c;
                e.predicted_budget = own;
            }
            if (!(up < lo)) e.holds = false;
        }
    }
    return e;
}

inline CertTraceEntry entry_at(const ClassDistances& d, int predicted,
                               const FewShotConfig& cfg, AttackModel model, int budget) {
    return model == AttackModel::Individual ? individual_entry(d, predicted, cfg, budget)
                                            : group_entry(d, predicted, cfg, budget);
}

inline CertResult certify(const ClassDistances& d, int predicted, const FewShotConfig& cfg,
                          AttackModel model) {
    cfg.validate();
    if (predicted < 0 || predicted >= d.ways()) {
        throw input_error("certify: predicted class out of range");
    }
    CertResult r;
    r.predicted = predicted;
    r.trace.reserve(cfg.trim + 1);
    for (int t = 0; t <= cfg.trim; ++t) {
        r.trace.push_back(entry_at(d, predicted, cfg, model, t));
    }
    r.tie_at_zero = !r.trace.front().holds;

    // Binary search over the monotone predicate, mid = ceil((low+high)/2).
    int low = 0, high = cfg.trim;
    while (low != high) {
        const int mid = (low + high + 1) / 2;
        if (r.trace[mid].holds) {
            low = mid;
        } else {
            high = mid - 1;
        }
    }
    // A tie on clean distances certifies nothing, including T=0's vacuous case.
    r.certified_size = r.tie_at_zero ? 0 : low;
    return r;
}

} // namespace detail

/// Largest T such that no per-class replacement of up to T distances in every
/// class can change the argmin. `predicted` must be fcert_predict's output.
inline CertResult certify_individual(const ClassDistances& d, int predicted,
                                     const FewShotConfig& cfg) {
    return detail::certify(d, predicted, cfg, AttackModel::Individual);
}

/// Largest T such that no replacement of up to T distances total (split across
/// the predicted class and one rival) can change the argmin.
inline CertResult certify_group(const ClassDistances& d, int predicted,
                                const FewShotConfig& cfg) {
    return detail::certify(d, predicted, cfg, AttackModel::Group);
}

struct QueryCertRecord {
    int predicted = 0;
    bool correct = false;
    int certified_size = 0;
};

/// Predict and certify every query of an episode under one attack model.
inline std::vector<QueryCertRecord> certification_curve(const Episode& episode,
                                                        const FewShotConfig& cfg,
                                                        AttackModel model) {
    episode.validate(cfg);
    std::vector<QueryCertRecord> out;
    out.reserve(episode.queries.size());
    for (const auto& [query, truth] : episode.queries) {
        const ClassDistances d = class_distances(episode, query, cfg);
        const int predicted = robust_score(d, cfg).argmin();
        const CertResult cert = detail::certify(d, predicted, cfg, model);
        out.push_back({predicted, predicted == truth, cert.certified_size});
    }
    return out;
}

} // namespace fcert

#endif
