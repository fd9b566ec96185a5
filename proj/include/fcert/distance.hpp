#ifndef FCERT_DISTANCE_HPP
#define FCERT_DISTANCE_HPP

#include <cmath>

#include "fcert/types.hpp"

namespace fcert {

inline double dot(const FeatureVector& a, const FeatureVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_l2(const FeatureVector& a, const FeatureVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double norm(const FeatureVector& a) { return std::sqrt(dot(a, a)); }

/// Cosine similarity in [-1, 1]. Both vectors must be nonzero.
inline double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw input_error("cosine: zero vector has no direction");
    }
    double s = dot(a, b) / (na * nb);
    if (s > 1.0) s = 1.0;
    if (s < -1.0) s = -1.0;
    return s;
}

inline double compute_distance(const FeatureVector& a, const FeatureVector& b,
                               DistanceMetric metric) {
    if (a.size() != b.size()) {
        throw input_error("compute_distance: dimension mismatch");
    }
    switch (metric) {
        case DistanceMetric::SquaredL2:
            return squared_l2(a, b);
        case DistanceMetric::L2:
            return std::sqrt(squared_l2(a, b));
        case DistanceMetric::CosineDistance:
            return 1.0 - cosine_similarity(a, b);
    }
    throw input_error("compute_distance: unknown metric");
}

} // namespace fcert

#endif
