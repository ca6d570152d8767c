#include "lcsmd/direction.hpp"

#include "lcsmd/rng.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lcsmd {

namespace {

std::uint64_t anm_seed(std::uint64_t base, int child, const std::vector<int>& parents) {
    std::vector<int> ps = parents;
    std::sort(ps.begin(), ps.end());
    std::uint64_t h = hash_mix(base, 0x616e6dULL, static_cast<std::uint64_t>(child));
    for (int p : ps) h = hash_mix(h, static_cast<std::uint64_t>(p) + 7);
    return h;
}

} // namespace

Regressor fit_regressor(const Dataset& d, int output, const std::vector<int>& inputs,
                        std::uint64_t seed, const TestConfig& cfg) {
    if (inputs.empty()) throw std::invalid_argument("regressor needs at least one input");
    for (int c : inputs)
        if (c == output) throw std::invalid_argument("output listed among inputs");
    std::vector<int> cols = {output};
    cols.insert(cols.end(), inputs.begin(), inputs.end());
    std::vector<int> rows = observed_rows(d, cols);
    if (static_cast<int>(rows.size()) < cfg.minEffectiveN)
        throw insufficient_data("too few observed rows for regression");

    std::vector<int> sub = evenly_spaced_subsample(static_cast<int>(rows.size()), cfg.maxKernelSamples);
    std::vector<int> subRows(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) subRows[i] = rows[sub[i]];

    Eigen::MatrixXd X(subRows.size(), inputs.size());
    for (std::size_t j = 0; j < inputs.size(); ++j)
        X.col(static_cast<int>(j)) = extract_column(d, inputs[j], subRows);
    Eigen::VectorXd y = extract_column(d, output, subRows);

    Regressor r;
    r.inputs = inputs;
    r.output = output;
    r.model = KernelRidge::fit(X, y, nullptr, seed);
    r.trainResidualVariance = r.model.train_residual_variance();
    return r;
}

CITestOutcome anm_direction_test(const Dataset& d, int child, const std::vector<int>& parents,
                                 const TestConfig& cfg) {
    cfg.validate();
    if (parents.empty()) throw std::invalid_argument("direction test needs candidate parents");
    std::vector<int> cols = {child};
    cols.insert(cols.end(), parents.begin(), parents.end());
    std::vector<int> rows = observed_rows(d, cols);
    if (rows.empty()) throw empty_after_deletion();
    const int effN = static_cast<int>(rows.size());
    if (effN < cfg.minEffectiveN) throw insufficient_data("too few rows for direction test");

    std::vector<int> sub = evenly_spaced_subsample(effN, cfg.maxKernelSamples);
    std::vector<int> subRows(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) subRows[i] = rows[sub[i]];

    Eigen::MatrixXd X(subRows.size(), parents.size());
    for (std::size_t j = 0; j < parents.size(); ++j)
        X.col(static_cast<int>(j)) = extract_column(d, parents[j], subRows);
    Eigen::VectorXd y = extract_column(d, child, subRows);
    bool constant = true;
    for (int i = 1; i < y.size() && constant; ++i) constant = y(i) == y(0);
    if (constant) throw insufficient_data("constant child carries no direction signal");

    const std::uint64_t seed = anm_seed(cfg.seed, child, parents);
    KernelRidge model = KernelRidge::fit(X, y, nullptr, seed);
    Eigen::VectorXd res = model.residuals(X, y);

    // joint decision: every parent-vs-residual test at alpha / |parents|
    const double bonferroni = cfg.alpha / static_cast<double>(parents.size());
    CITestOutcome joint;
    joint.effectiveN = effN;
    joint.independent = true;
    joint.pValue = 1.0;
    joint.statistic = 0.0;
    for (std::size_t j = 0; j < parents.size(); ++j) {
        TestConfig sub_cfg = cfg;
        sub_cfg.alpha = bonferroni;
        sub_cfg.seed = hash_mix(seed, static_cast<std::uint64_t>(parents[j]) + 31);
        CITestOutcome o = hsic_test(res, X.col(static_cast<int>(j)), nullptr, sub_cfg);
        joint.statistic = std::max(joint.statistic, o.statistic);
        double adjusted = std::min(1.0, o.pValue * static_cast<double>(parents.size()));
        joint.pValue = std::min(joint.pValue, adjusted);
        if (!o.independent) joint.independent = false;
    }
    return joint;
}

CITestOutcome StatisticalAnmEngine::direction_test(int child, const std::vector<int>& parents) {
    CITestOutcome o = anm_direction_test(data_, child, parents, cfg_);
    std::vector<std::string> zn;
    for (int p : parents) zn.push_back(data_.columns().at(p));
    audit.push_back(AuditRecord{"anm_direction", data_.columns().at(child), "", zn, false, o});
    return o;
}

OracleAnmEngine::OracleAnmEngine(const MGraph& truth) : truth_(truth) {
    vars_ = truth_.substantive_nodes();
}

CITestOutcome OracleAnmEngine::direction_test(int child, const std::vector<int>& parents) {
    // independence of residual and hypothesized causes holds exactly when the
    // candidate set is the true parent set and no involved indicator descends
    // from the child
    std::uint64_t truePa = 0;
    bits::for_each(truth_.parents_mask(vars_.at(child)), [&](int p) {
        if (truth_.is_substantive(p)) truePa |= bits::one(p);
    });
    std::uint64_t cand = 0;
    for (int p : parents) cand |= bits::one(vars_.at(p));
    bool independent = false;
    if (cand == truePa && cand != 0) {
        std::vector<int> truthParents = bits::to_vector(cand);
        independent = anm_identifiable_in_missing(truth_, vars_.at(child), truthParents);
    }
    CITestOutcome o;
    o.statistic = independent ? 0.0 : 1.0;
    o.pValue = independent ? 1.0 : 0.0;
    o.independent = independent;
    o.effectiveN = 0;
    std::vector<std::string> zn;
    for (int p : parents) zn.push_back(truth_.node(vars_.at(p)).name);
    audit.push_back(AuditRecord{"anm_direction", truth_.node(vars_.at(child)).name, "", zn, false, o});
    return o;
}

InPattern estimate_in_pattern(AnmEngine& engine, const SkeletonResult& sk, const DirectionOptions& opts) {
    InPattern out{sk.pattern, {}, {}, {}};
    const auto substantive = sk.pattern.substantive_nodes();
    const int m = static_cast<int>(substantive.size());
    const std::uint64_t subMask = (m >= 64) ? ~0ULL : ((1ULL << m) - 1);

    // per-node search: largest candidate parent sets first, first pass wins
    std::vector<std::pair<int, std::vector<int>>> accepted;
    for (int v = 0; v < m; ++v) {
        std::vector<int> pool = bits::to_vector(sk.pattern.undirected_mask(v) & subMask);
        if (pool.empty()) continue;
        const int top = std::min<int>(opts.maxParents, static_cast<int>(pool.size()));
        bool done = false;
        for (int s = top; s >= 1 && !done; --s) {
            std::vector<int> idx(s);
            for (int i = 0; i < s; ++i) idx[i] = i;
            while (!done) {
                std::vector<int> cand(s);
                for (int i = 0; i < s; ++i) cand[i] = pool[idx[i]];
                try {
                    if (engine.direction_test(v, cand).independent) {
                        accepted.emplace_back(v, cand);
                        done = true;
                        break;
                    }
                } catch (const insufficient_data&) {
                } catch (const empty_after_deletion&) {
                }
                int i = s - 1;
                const int n = static_cast<int>(pool.size());
                while (i >= 0 && idx[i] == n - s + i) --i;
                if (i < 0) break;
                ++idx[i];
                for (int j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
            }
        }
    }

    // edges claimed in both directions stay undirected
    std::set<std::pair<int, int>> forward;
    for (const auto& [child, pa] : accepted)
        for (int p : pa) forward.insert({p, child});
    std::set<std::pair<int, int>> tied;
    for (const auto& [a, b] : forward)
        if (forward.count({b, a})) tied.insert({std::min(a, b), std::max(a, b)});
    for (const auto& [a, b] : tied)
        out.notes.push_back("tie: both directions pass for " + sk.pattern.node(a).name + " - " +
                            sk.pattern.node(b).name + "; edge left undirected");

    // apply acceptances in node order; an acceptance that would close a cycle
    // is dropped whole
    for (const auto& [child, pa] : accepted) {
        std::vector<int> effective;
        for (int p : pa)
            if (!tied.count({std::min(p, child), std::max(p, child)})) effective.push_back(p);
        if (effective.empty()) continue;
        Pattern trial = out.pattern;
        bool ok = true;
        for (int p : effective) {
            try {
                trial = orient_edge(trial, p, child);
            } catch (const orientation_rejected&) {
                ok = false;
                break;
            } catch (const std::invalid_argument&) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.pattern = trial;
            for (int p : effective) out.orientedByAnm.emplace_back(p, child);
        } else {
            out.notes.push_back("conflict: parent set for " + sk.pattern.node(child).name +
                                " dropped to keep the pattern acyclic");
        }
    }
    return out;
}

InPattern apply_orientation_rule(const InPattern& p) {
    InPattern out = p;
    const auto substantive = out.pattern.substantive_nodes();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v : substantive) {
            std::uint64_t und = out.pattern.undirected_mask(v);
            if (!und) continue;
            if (!potential_nonidentifiable_paths(out.pattern, v).empty()) continue;
            bits::for_each(und, [&](int w) {
                try {
                    out.pattern = orient_edge(out.pattern, v, w);
                    out.orientedByRule.emplace_back(v, w);
                    changed = true;
                } catch (const orientation_rejected&) {
                    out.notes.push_back("rule: orienting " + out.pattern.node(v).name + " -> " +
                                        out.pattern.node(w).name + " skipped (cycle)");
                }
            });
        }
    }
    return out;
}

InPattern lcs_md(AnmEngine& engine, const SkeletonResult& sk, const DirectionOptions& opts) {
    return apply_orientation_rule(estimate_in_pattern(engine, sk, opts));
}

InPattern lcs_md(const Dataset& d, const SkeletonResult& sk, const TestConfig& cfg,
                 const DirectionOptions& opts) {
    StatisticalAnmEngine engine(d, cfg);
    return lcs_md(engine, sk, opts);
}

InPattern lcs_md_oracle(const MGraph& truth, const SkeletonResult& sk, const DirectionOptions& opts) {
    OracleAnmEngine engine(truth);
    return lcs_md(engine, sk, opts);
}

} // namespace lcsmd
