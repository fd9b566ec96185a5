#ifndef FCERT_TESTS_HELPERS_HPP
#define FCERT_TESTS_HELPERS_HPP

#include <algorithm>
#include <vector>

#include "fcert/prng.hpp"
#include "fcert/types.hpp"

namespace fcert::testing {

inline std::vector<double> random_sorted_distances(Prng& rng, int shots, double scale = 10.0) {
    std::vector<double> d(shots);
    for (double& v : d) v = scale * rng.next_unit();
    std::sort(d.begin(), d.end());
    return d;
}

inline ClassDistances random_instance(Prng& rng, int ways, int shots, double scale = 10.0) {
    ClassDistances d;
    for (int c = 0; c < ways; ++c) {
        d.per_class.push_back(random_sorted_distances(rng, shots, scale));
    }
    return d;
}

// Gaussian-cluster episode: class c centered at separation * e_c.
inline Episode random_episode(Prng& rng, int ways, int shots, int queries_per_class, int dim,
                              double separation, double sigma) {
    Episode ep;
    for (int c = 0; c < ways; ++c) {
        ep.class_map.push_back("class" + std::to_string(c));
        std::vector<FeatureVector> support;
        for (int i = 0; i < shots; ++i) {
            FeatureVector x(dim, 0.0);
            x[c % dim] = separation;
            for (double& v : x) v += sigma * rng.next_normal();
            support.push_back(std::move(x));
        }
        ep.support.push_back(std::move(support));
    }
    for (int c = 0; c < ways; ++c) {
        for (int q = 0; q < queries_per_class; ++q) {
            FeatureVector x(dim, 0.0);
            x[c % dim] = separation;
            for (double& v : x) v += sigma * rng.next_normal();
            ep.queries.emplace_back(std::move(x), c);
        }
    }
    return ep;
}

} // namespace fcert::testing

#endif
