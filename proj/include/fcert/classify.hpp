#ifndef FCERT_CLASSIFY_HPP
#define FCERT_CLASSIFY_HPP

#include <algorithm>
#include <tuple>
#include <utility>
#include <vector>

#include "fcert/distance.hpp"
#include "fcert/types.hpp"

namespace fcert {

/// Distances from the query to every support vector, sorted ascending per class.
/// Sorting is stable on (distance, within-class support index).
inline ClassDistances class_distances(const Episode& episode, const FeatureVector& query,
                                      const FewShotConfig& cfg) {
    episode.validate(cfg);
    ClassDistances out;
    out.per_class.reserve(episode.support.size());
    for (const auto& cls : episode.support) {
        std::vector<double> d;
        d.reserve(cls.size());
        for (const auto& x : cls) d.push_back(compute_distance(query, x, cfg.metric));
        std::stable_sort(d.begin(), d.end());
        out.per_class.push_back(std::move(d));
    }
    return out;
}

/// Trimmed mean of one sorted distance sequence: drop the K' smallest and
/// K' largest, average the K-2K' in between.
inline double trimmed_mean(const std::vector<double>& sorted, int trim) {
    const int k = static_cast<int>(sorted.size());
    if (trim < 0 || trim > (k - 1) / 2) {
        throw input_error("trimmed_mean: trim must satisfy 0 <= K' <= floor((K-1)/2)");
    }
    double s = 0.0;
    for (int i = trim; i < k - trim; ++i) s += sorted[i];
    return s / (k - 2 * trim);
}

inline RobustScores robust_score(const ClassDistances& d, const FewShotConfig& cfg) {
    RobustScores r;
    r.per_class.reserve(d.per_class.size());
    for (const auto& cls : d.per_class) {
        if (static_cast<int>(cls.size()) != cfg.shots) {
            throw input_error("robust_score: distance sequence length != K");
        }
        r.per_class.push_back(trimmed_mean(cls, cfg.trim));
    }
    return r;
}

/// Robust-distance classification: argmin over per-class trimmed means,
/// ties broken toward the lowest class index.
inline int fcert_predict(const Episode& episode, const FeatureVector& query,
                         const FewShotConfig& cfg) {
    return robust_score(class_distances(episode, query, cfg), cfg).argmin();
}

namespace detail {

constexpr double kWeightFloor = 1e-6;

// Cosine-similarity weight for one support vector, clamped to [kWeightFloor, 1].
inline double cosine_weight(const FeatureVector& query, const FeatureVector& support) {
    double w = cosine_similarity(query, support);
    if (w < 0.0) w = 0.0;
    return std::max(w, kWeightFloor);
}

} // namespace detail

/// Variant scoring each remaining distance by the cosine similarity between
/// the query and the support vector that produced it.
inline int fcert_predict_weighted(const Episode& episode, const FeatureVector& query,
                                  const FewShotConfig& cfg) {
    episode.validate(cfg);
    std::vector<double> scores;
    scores.reserve(episode.support.size());
    for (const auto& cls : episode.support) {
        std::vector<std::pair<double, int>> ranked;   // (distance, support index)
        ranked.reserve(cls.size());
        for (int i = 0; i < static_cast<int>(cls.size()); ++i) {
            ranked.emplace_back(compute_distance(query, cls[i], cfg.metric), i);
        }
        std::stable_sort(ranked.begin(), ranked.end());
        double num = 0.0, den = 0.0;
        for (int i = cfg.trim; i < cfg.shots - cfg.trim; ++i) {
            const double w = detail::cosine_weight(query, cls[ranked[i].second]);
            num += w * ranked[i].first;
            den += w;
        }
        scores.push_back(num / den);
    }
    RobustScores r{std::move(scores)};
    return r.argmin();
}

/// Mean feature vector of one class's support samples.
inline FeatureVector prototype(const std::vector<FeatureVector>& support) {
    FeatureVector mean(support.front().size(), 0.0);
    for (const auto& x : support) {
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += x[i];
    }
    for (double& v : mean) v /= static_cast<double>(support.size());
    return mean;
}

inline int protonet_predict(const Episode& episode, const FeatureVector& query,
                            const FewShotConfig& cfg) {
    episode.validate(cfg);
    int best = 0;
    double best_d = 0.0;
    for (int c = 0; c < episode.ways(); ++c) {
        const double d = compute_distance(query, prototype(episode.support[c]), cfg.metric);
        if (c == 0 || d < best_d) {
            best = c;
            best_d = d;
        }
    }
    return best;
}

/// Majority vote over the k globally nearest support samples. Distance ties
/// resolve by (class index, within-class index); vote ties by lowest class.
inline int knn_predict(const Episode& episode, const FeatureVector& query, int k,
                       const FewShotConfig& cfg) {
    episode.validate(cfg);
    const int total = episode.ways() * cfg.shots;
    if (k < 1 || k > total) {
        throw input_error("knn_predict: k must be in [1, C*K]");
    }
    std::vector<std::tuple<double, int, int>> all;   // (distance, class, index)
    all.reserve(total);
    for (int c = 0; c < episode.ways(); ++c) {
        for (int i = 0; i < cfg.shots; ++i) {
            all.emplace_back(compute_distance(query, episode.support[c][i], cfg.metric), c, i);
        }
    }
    std::sort(all.begin(), all.end());
    std::vector<int> votes(episode.ways(), 0);
    for (int j = 0; j < k; ++j) ++votes[std::get<1>(all[j])];
    int best = 0;
    for (int c = 1; c < episode.ways(); ++c) {
        if (votes[c] > votes[best]) best = c;
    }
    return best;
}

} // namespace fcert

#endif
