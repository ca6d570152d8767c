#ifndef LCSMD_METRICS_HPP
#define LCSMD_METRICS_HPP

#include "lcsmd/direction.hpp"
#include "lcsmd/graph.hpp"
#include "lcsmd/skeleton.hpp"

#include <string>

namespace lcsmd {

struct SkeletonMetrics {
    double precision = 1, recall = 1, f1 = 1;
    int shd = 0;
    bool vacuous = false;
};

struct OrientationMetrics {
    double precision = 1, recall = 1, f1 = 1;
    int shd = 0;
    bool vacuous = false;
};

struct IndicatorMetrics {
    double parentSetAccuracy = 1;
    double selfMaskingAccuracy = 1;
    bool vacuous = false;
};

struct EvalReport {
    SkeletonMetrics skeleton;
    OrientationMetrics orientation;
    IndicatorMetrics indicator;
    std::uint64_t seed = 0;
    int n = 0;
    std::string configHash;
};

// adjacency precision/recall/F1 over substantive pairs; SHD is the symmetric
// difference of the adjacency sets
SkeletonMetrics skeleton_metrics(const Pattern& est, const MGraph& truth);

// directed comparison: a directed estimated edge is correct only with the
// same direction in the truth; undirected estimated edges over a true edge
// cost 1 in SHD and count as a recall miss, never as a precision hit or miss
OrientationMetrics orientation_metrics(const InPattern& est, const MGraph& truth);

IndicatorMetrics indicator_metrics(const SkeletonResult& est, const MGraph& truth);

} // namespace lcsmd

#endif
