#ifndef FCERT_TYPES_HPP
#define FCERT_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fcert/error.hpp"

namespace fcert {

/// Embedding coordinates of one sample. All elements must be finite.
using FeatureVector = std::vector<double>;

inline void check_finite(const FeatureVector& v, const std::string& context) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw input_error(context + ": non-finite feature value");
        }
    }
}

enum class DistanceMetric {
    SquaredL2,
    L2,
    CosineDistance,
};

inline std::string to_string(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::SquaredL2: return "sq-l2";
        case DistanceMetric::L2: return "l2";
        case DistanceMetric::CosineDistance: return "cosine";
    }
    return "?";
}

/// C-way-K-shot task parameters. `trim` is the per-side trimming depth K'.
struct FewShotConfig {
    int ways = 5;
    int shots = 5;
    int trim = 2;
    DistanceMetric metric = DistanceMetric::SquaredL2;

    void validate() const {
        if (ways < 2) throw input_error("FewShotConfig: ways must be >= 2");
        if (shots < 1) throw input_error("FewShotConfig: shots must be >= 1");
        if (trim < 0 || trim > (shots - 1) / 2) {
            throw input_error("FewShotConfig: trim must satisfy 0 <= K' <= floor((K-1)/2)");
        }
    }

    // Width of the window that survives trimming.
    int window() const { return shots - 2 * trim; }
};

/// One C-way-K-shot episode: K support features per class plus labeled queries.
/// Class indices are 0-based internally; class_map recovers the dataset label.
struct Episode {
    std::vector<std::string> class_map;                   // episode class -> dataset label
    std::vector<std::vector<FeatureVector>> support;      // [C][K]
    std::vector<std::pair<FeatureVector, int>> queries;   // (feature, episode class)

    int ways() const { return static_cast<int>(support.size()); }
    int shots() const { return support.empty() ? 0 : static_cast<int>(support.front().size()); }

    void validate(const FewShotConfig& cfg) const {
        if (ways() != cfg.ways) throw input_error("Episode: class count does not match config");
        for (const auto& cls : support) {
            if (static_cast<int>(cls.size()) != cfg.shots) {
                throw input_error("Episode: every class needs exactly K support vectors");
            }
        }
        for (const auto& [q, label] : queries) {
            (void)q;
            if (label < 0 || label >= ways()) {
                throw input_error("Episode: query label out of range");
            }
        }
    }
};

/// Per class, the query-to-support distances sorted ascending.
struct ClassDistances {
    std::vector<std::vector<double>> per_class;   // [C][K], each sorted ascending

    int ways() const { return static_cast<int>(per_class.size()); }
    int shots() const { return per_class.empty() ? 0 : static_cast<int>(per_class.front().size()); }
};

/// Per class, the trimmed-mean robust distance.
struct RobustScores {
    std::vector<double> per_class;

    /// Argmin with lowest-index tie-break.
    int argmin() const {
        int best = 0;
        for (int c = 1; c < static_cast<int>(per_class.size()); ++c) {
            if (per_class[c] < per_class[best]) best = c;
        }
        return best;
    }

    /// True when the argmin is not strict (some other class attains the minimum).
    bool has_tie() const {
        int best = argmin();
        for (int c = 0; c < static_cast<int>(per_class.size()); ++c) {
            if (c != best && per_class[c] == per_class[best]) return true;
        }
        return false;
    }
};

} // namespace fcert

#endif
