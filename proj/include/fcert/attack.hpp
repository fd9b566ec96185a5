#ifndef FCERT_ATTACK_HPP
#define FCERT_ATTACK_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fcert/certify.hpp"
#include "fcert/classify.hpp"
#include "fcert/prng.hpp"
#include "fcert/types.hpp"

namespace fcert {

enum class AttackStrategy {
    Collision,    // rivals collide with the query; the true class is left alone
    CrossClass,   // true-class supports overwritten with another class's features
    FarPoint,     // true-class supports pushed far from the query
};

inline std::string to_string(AttackStrategy s) {
    switch (s) {
        case AttackStrategy::Collision: return "collision";
        case AttackStrategy::CrossClass: return "cross-class";
        case AttackStrategy::FarPoint: return "far-point";
    }
    return "?";
}

struct AttackSpec {
    AttackModel model = AttackModel::Individual;
    int budget = 0;
    AttackStrategy strategy = AttackStrategy::Collision;
    std::uint64_t rng_seed = 0;
};

namespace detail {

constexpr double kFarScale = 1e3;

// Largest pairwise l2 distance among the support features and the query.
inline double episode_diameter(const Episode& episode, const FeatureVector& query) {
    std::vector<const FeatureVector*> all;
    for (const auto& cls : episode.support) {
        for (const auto& x : cls) all.push_back(&x);
    }
    all.push_back(&query);
    double best = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            best = std::max(best, std::sqrt(squared_l2(*all[i], *all[j])));
        }
    }
    return best;
}

// Deterministic far-away point: first standard basis direction
// orthogonalized against the query, scaled past the episode diameter.
inline FeatureVector far_point(const Episode& episode, const FeatureVector& query) {
    FeatureVector u(query.size(), 0.0);
    u[0] = 1.0;
    const double qn2 = dot(query, query);
    if (qn2 > 0.0) {
        const double proj = query[0] / qn2;
        for (std::size_t i = 0; i < u.size(); ++i) u[i] -= proj * query[i];
    }
    double un = norm(u);
    if (un == 0.0) {
        // Query parallel to e1; fall back to the next axis (D >= 2) or -e1.
        if (u.size() > 1) {
            u.assign(u.size(), 0.0);
            u[1] = 1.0;
        } else {
            u[0] = query[0] >= 0.0 ? -1.0 : 1.0;
        }
        un = 1.0;
    }
    double diameter = episode_diameter(episode, query);
    if (diameter == 0.0) diameter = 1.0;
    FeatureVector out = query;
    const double scale = kFarScale * diameter / un;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * u[i];
    return out;
}

} // namespace detail

/// Per-class poisoning: for every rival class, `budget` support features
/// become exact copies of the query feature; the true class's features are
/// degraded per the strategy. Labels and per-class counts are unchanged.
inline Episode attack_individual(const Episode& episode, const FeatureVector& query,
                                 int true_label, const AttackSpec& spec,
                                 const FewShotConfig& cfg) {
    episode.validate(cfg);
    if (spec.budget < 0 || spec.budget > cfg.shots) {
        throw input_error("attack_individual: budget must be in [0, K]");
    }
    Episode out = episode;
    Prng rng(spec.rng_seed);
    for (int c = 0; c < out.ways(); ++c) {
        const auto victims = rng.sample_indices(cfg.shots, spec.budget);
        if (c != true_label) {
            for (auto i : victims) out.support[c][i] = query;
            continue;
        }
        switch (spec.strategy) {
            case AttackStrategy::Collision:
                // Colliding the true class with its own query would only
                // help it; the feature-collision attack leaves it alone.
                break;
            case AttackStrategy::CrossClass: {
                const int donor = (true_label + 1) % out.ways();
                for (std::size_t j = 0; j < victims.size(); ++j) {
                    out.support[c][victims[j]] =
                        episode.support[donor][j % episode.support[donor].size()];
                }
                break;
            }
            case AttackStrategy::FarPoint: {
                const FeatureVector far = detail::far_point(episode, query);
                for (auto i : victims) out.support[c][i] = far;
                break;
            }
        }
    }
    return out;
}

/// Total-budget poisoning: all `budget` replacements target the rival class
/// whose prototype is nearest to the query, colliding it with the query.
inline Episode attack_group(const Episode& episode, const FeatureVector& query,
                            int true_label, const AttackSpec& spec,
                            const FewShotConfig& cfg) {
    episode.validate(cfg);
    if (spec.budget < 0 || spec.budget > cfg.shots) {
        throw input_error("attack_group: budget must be in [0, K]");
    }
    int target = -1;
    double target_d = 0.0;
    for (int c = 0; c < episode.ways(); ++c) {
        if (c == true_label) continue;
        const double d = compute_distance(query, prototype(episode.support[c]), cfg.metric);
        if (target < 0 || d < target_d) {
            target = c;
            target_d = d;
        }
    }
    Episode out = episode;
    Prng rng(spec.rng_seed);
    for (auto i : rng.sample_indices(cfg.shots, spec.budget)) {
        out.support[target][i] = query;
    }
    return out;
}

namespace detail {

// Worst-case raise of one class's sorted distances with budget T: the
// values at sorted positions K'..K'+T-1 become the current maximum.
inline std::vector<double> raise_distances(std::vector<double> d, int budget, int trim) {
    const double top = d.back();
    for (int i = trim; i < trim + budget; ++i) d[i] = top;
    std::stable_sort(d.begin(), d.end());
    return d;
}

// Best-case lowering: the T largest values become the current minimum.
inline std::vector<double> lower_distances(std::vector<double> d, int budget) {
    const double bottom = d.front();
    const int k = static_cast<int>(d.size());
    for (int i = k - budget; i < k; ++i) d[i] = bottom;
    std::stable_sort(d.begin(), d.end());
    return d;
}

} // namespace detail

/// The optimal distance-level attack: raise the predicted class with budget
/// `predicted_budget`, lower the target rival with `target_budget`. The
/// resulting robust scores attain the analytic bounds exactly.
inline ClassDistances attack_tightness(const ClassDistances& d, int predicted, int target,
                                       int predicted_budget, int target_budget,
                                       const FewShotConfig& cfg) {
    cfg.validate();
    if (predicted_budget < 0 || predicted_budget > cfg.trim ||
        target_budget < 0 || target_budget > cfg.trim) {
        throw input_error("attack_tightness: budgets must be in [0, K']");
    }
    ClassDistances out = d;
    out.per_class[predicted] =
        detail::raise_distances(out.per_class[predicted], predicted_budget, cfg.trim);
    out.per_class[target] = detail::lower_distances(out.per_class[target], target_budget);
    return out;
}

/// Whether the tightness construction with total budget T defeats the
/// prediction (post-attack argmin differs from `predicted`, or ties).
inline bool empirical_flip_check(const ClassDistances& d, int predicted,
                                 const FewShotConfig& cfg, AttackModel model, int budget) {
    cfg.validate();
    if (budget < 0 || budget > cfg.trim) {
        throw input_error("empirical_flip_check: budget must be in [0, K']");
    }
    const auto flips = [&](const ClassDistances& poisoned) {
        const RobustScores r = robust_score(poisoned, cfg);
        return r.argmin() != predicted || r.has_tie();
    };
    if (model == AttackModel::Individual) {
        // Every class may absorb the full budget: raise the predicted class
        // and lower all rivals at once.
        ClassDistances poisoned = d;
        poisoned.per_class[predicted] =
            detail::raise_distances(poisoned.per_class[predicted], budget, cfg.trim);
        for (int c = 0; c < d.ways(); ++c) {
            if (c != predicted) {
                poisoned.per_class[c] = detail::lower_distances(poisoned.per_class[c], budget);
            }
        }
        return flips(poisoned);
    }
    // Group: try every split of the budget against every rival.
    for (int own = 0; own <= budget; ++own) {
        for (int c = 0; c < d.ways(); ++c) {
            if (c == predicted) continue;
            if (flips(attack_tightness(d, predicted, c, own, budget - own, cfg))) {
                return true;
            }
        }
    }
    return false;
}

} // namespace fcert

#endif
