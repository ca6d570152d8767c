#include "lcsmd/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace lcsmd {

namespace {

// truth node index -> est node index, matched by name; throws with the full
// difference when the universes disagree
std::map<int, int> match_universe(const std::vector<Node>& est, const std::vector<Node>& truth) {
    std::map<std::string, int> estByName;
    for (std::size_t i = 0; i < est.size(); ++i) estByName[est[i].name] = static_cast<int>(i);
    std::map<int, int> out;
    std::vector<std::string> missing, extra;
    std::set<std::string> truthNames;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truthNames.insert(truth[i].name);
        auto it = estByName.find(truth[i].name);
        if (it == estByName.end()) missing.push_back(truth[i].name);
        else out[static_cast<int>(i)] = it->second;
    }
    for (const auto& n : est)
        if (!truthNames.count(n.name)) extra.push_back(n.name);
    if (!missing.empty() || !extra.empty()) {
        std::ostringstream os;
        os << "node universes differ;";
        if (!missing.empty()) {
            os << " missing from estimate:";
            for (const auto& n : missing) os << ' ' << n;
        }
        if (!extra.empty()) {
            os << " extra in estimate:";
            for (const auto& n : extra) os << ' ' << n;
        }
        throw std::invalid_argument(os.str());
    }
    return out;
}

double f1_of(double precision, double recall) {
    return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

using PairSet = std::set<std::pair<int, int>>;

// substantive adjacency of the truth graph, as unordered truth-index pairs
PairSet truth_adjacency(const MGraph& truth) {
    PairSet out;
    for (auto [a, b] : truth.edges())
        if (truth.node(a).kind == NodeKind::Substantive && truth.node(b).kind == NodeKind::Substantive)
            out.insert({std::min(a, b), std::max(a, b)});
    return out;
}

} // namespace

SkeletonMetrics skeleton_metrics(const Pattern& est, const MGraph& truth) {
    auto map = match_universe(est.nodes(), truth.nodes());
    PairSet truthAdj = truth_adjacency(truth);

    PairSet estAdj;
    for (int a : truth.substantive_nodes())
        for (int b : truth.substantive_nodes())
            if (a < b && est.adjacent(map[a], map[b])) estAdj.insert({a, b});

    int tp = 0;
    for (const auto& e : estAdj) tp += truthAdj.count(e) ? 1 : 0;
    const int fp = static_cast<int>(estAdj.size()) - tp;
    const int fn = static_cast<int>(truthAdj.size()) - tp;

    SkeletonMetrics m;
    m.vacuous = estAdj.empty() && truthAdj.empty();
    m.precision = estAdj.empty() ? 1.0 : static_cast<double>(tp) / estAdj.size();
    m.recall = truthAdj.empty() ? 1.0 : static_cast<double>(tp) / truthAdj.size();
    m.f1 = m.vacuous ? 1.0 : f1_of(m.precision, m.recall);
    m.shd = fp + fn;
    return m;
}

OrientationMetrics orientation_metrics(const InPattern& est, const MGraph& truth) {
    auto map = match_universe(est.pattern.nodes(), truth.nodes());
    std::map<int, int> inv;
    for (auto [t, e] : map) inv[e] = t;

    PairSet truthDirected;
    for (auto [a, b] : truth.edges())
        if (truth.node(a).kind == NodeKind::Substantive && truth.node(b).kind == NodeKind::Substantive)
            truthDirected.insert({a, b});

    int correct = 0, reversed = 0, inserted = 0;
    int estDirected = 0;
    PairSet coveredTruthPairs;
    for (auto [ea, eb] : est.pattern.directed_edges()) {
        if (est.pattern.node(ea).kind != NodeKind::Substantive ||
            est.pattern.node(eb).kind != NodeKind::Substantive)
            continue;
        int a = inv[ea], b = inv[eb];
        ++estDirected;
        if (truthDirected.count({a, b})) {
            ++correct;
            coveredTruthPairs.insert({std::min(a, b), std::max(a, b)});
        } else if (truthDirected.count({b, a})) {
            ++reversed;
            coveredTruthPairs.insert({std::min(a, b), std::max(a, b)});
        } else {
            ++inserted;
        }
    }
    int undirectedOverTrue = 0, undirectedInserted = 0;
    for (auto [ea, eb] : est.pattern.undirected_edges()) {
        if (est.pattern.node(ea).kind != NodeKind::Substantive ||
            est.pattern.node(eb).kind != NodeKind::Substantive)
            continue;
        int a = inv[ea], b = inv[eb];
        if (truthDirected.count({a, b}) || truthDirected.count({b, a})) {
            ++undirectedOverTrue;
            coveredTruthPairs.insert({std::min(a, b), std::max(a, b)});
        } else {
            ++undirectedInserted;
        }
    }
    int deleted = static_cast<int>(truthDirected.size()) - static_cast<int>(coveredTruthPairs.size());

    OrientationMetrics m;
    m.vacuous = estDirected == 0 && truthDirected.empty();
    m.precision = estDirected == 0 ? 1.0 : static_cast<double>(correct) / estDirected;
    m.recall = truthDirected.empty() ? 1.0 : static_cast<double>(correct) / truthDirected.size();
    m.f1 = m.vacuous ? 1.0 : f1_of(m.precision, m.recall);
    m.shd = inserted + undirectedInserted + deleted + reversed + undirectedOverTrue;
    return m;
}

IndicatorMetrics indicator_metrics(const SkeletonResult& est, const MGraph& truth) {
    auto map = match_universe(est.pattern.nodes(), truth.nodes());

    IndicatorMetrics m;
    auto indicators = truth.indicator_nodes();
    if (indicators.empty()) {
        m.vacuous = true;
        return m;
    }
    int parentOk = 0, flagOk = 0;
    std::set<int> estFlags(est.selfMaskingIndicators.begin(), est.selfMaskingIndicators.end());
    for (int r : indicators) {
        int er = map[r];
        // parent sets compared by name through the universe map
        std::set<int> truthParents;
        bits::for_each(truth.parents_mask(r), [&](int p) { truthParents.insert(map[p]); });
        std::set<int> estParents;
        bits::for_each(est.pattern.directed_in(er), [&](int p) { estParents.insert(p); });
        if (truthParents == estParents) ++parentOk;

        bool truthSelfMasking = truth.parents_mask(r) == bits::one(truth.node(r).of);
        bool estSelfMasking = estFlags.count(er) > 0;
        if (truthSelfMasking == estSelfMasking) ++flagOk;
    }
    m.parentSetAccuracy = static_cast<double>(parentOk) / indicators.size();
    m.selfMaskingAccuracy = static_cast<double>(flagOk) / indicators.size();
    return m;
}

} // namespace lcsmd
