#include "lcsmd/skeleton.hpp"

#include "lcsmd/rng.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace lcsmd {

namespace {

// size-k subsets of a sorted pool in lexicographic order; fn returns true to
// stop enumeration early
template <typename F>
bool for_each_combination(const std::vector<int>& pool, int k, F&& fn) {
    const int n = static_cast<int>(pool.size());
    if (k > n) return false;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    std::vector<int> subset(k);
    while (true) {
        for (int i = 0; i < k; ++i) subset[i] = pool[idx[i]];
        if (fn(subset)) return true;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return false;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::vector<int> sorted_masked(std::uint64_t mask, std::uint64_t keep) {
    return bits::to_vector(mask & keep);
}

std::string key_of(const char* tag, int x, int y, const std::vector<int>& z, std::uint64_t hyp) {
    std::ostringstream os;
    os << tag << '|' << x << '|' << y << '|';
    for (int c : z) os << c << ',';
    os << '|' << hyp;
    return os.str();
}

} // namespace

void CiEngine::log(const std::string& stage, const std::string& x, const std::string& y,
                   const std::vector<std::string>& z, bool corrected, const CITestOutcome& o) {
    audit.push_back(AuditRecord{stage, x, y, z, corrected, o});
}

// ---- statistical engine ------------------------------------------------------

StatisticalCiEngine::StatisticalCiEngine(const Dataset& d, const TestConfig& cfg)
    : data_(d), cfg_(cfg) {
    cfg_.validate();
}

std::vector<int> StatisticalCiEngine::partially_observed_vars() const {
    return data_.partially_observed_columns();
}

std::uint64_t StatisticalCiEngine::hypothesis_key(const std::vector<int>& cols,
                                                  const Pattern& hyp) const {
    // the recovery weights depend only on the involved indicators' parent
    // sets and self-masking shape, so that is what the cache keys on
    std::uint64_t h = 0x726563ULL;
    for (int c : cols) {
        int r = hyp.indicator_of(c);
        if (r < 0) continue;
        h = hash_mix(h, static_cast<std::uint64_t>(c), hyp.directed_in(r));
    }
    return h;
}

CITestOutcome StatisticalCiEngine::ci(int x, int y, const std::vector<int>& z) {
    std::vector<int> zs = z;
    std::sort(zs.begin(), zs.end());
    std::string key = key_of("ci", std::min(x, y), std::max(x, y), zs, 0);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    CITestOutcome o = ci_test(data_, x, y, zs, nullptr, cfg_);
    cache_[key] = o;
    std::vector<std::string> zn;
    for (int c : zs) zn.push_back(var_name(c));
    log("ci", var_name(x), var_name(y), zn, false, o);
    return o;
}

CITestOutcome StatisticalCiEngine::ci_corrected(int x, int y, const std::vector<int>& z,
                                                const Pattern& hyp) {
    std::vector<int> zs = z;
    std::sort(zs.begin(), zs.end());
    std::vector<int> cols = {std::min(x, y), std::max(x, y)};
    cols.insert(cols.end(), zs.begin(), zs.end());
    std::string key = key_of("cic", std::min(x, y), std::max(x, y), zs, hypothesis_key(cols, hyp));
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    CITestOutcome o = corrected_ci_test(data_, hyp, x, y, zs, cfg_);
    cache_[key] = o;
    std::vector<std::string> zn;
    for (int c : zs) zn.push_back(var_name(c));
    log("ci_corrected", var_name(x), var_name(y), zn, true, o);
    return o;
}

CITestOutcome StatisticalCiEngine::indicator_ci(int rVar, int v, const std::vector<int>& z) {
    std::vector<int> zs = z;
    std::sort(zs.begin(), zs.end());
    std::string key = key_of("ind", rVar, v, zs, 0);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    CITestOutcome o = indicator_ci_test(data_, rVar, v, zs, cfg_);
    cache_[key] = o;
    std::vector<std::string> zn;
    for (int c : zs) zn.push_back(var_name(c));
    log("indicator_ci", "R_" + var_name(rVar), var_name(v), zn, false, o);
    return o;
}

CITestOutcome StatisticalCiEngine::indicator_ci_corrected(int rVar, int v, const std::vector<int>& z,
                                                          const Pattern& hyp) {
    std::vector<int> zs = z;
    std::sort(zs.begin(), zs.end());
    std::vector<int> cols = {v};
    cols.insert(cols.end(), zs.begin(), zs.end());
    std::string key = key_of("indc", rVar, v, zs, hypothesis_key(cols, hyp));
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    CITestOutcome o = corrected_indicator_ci_test(data_, hyp, rVar, v, zs, cfg_);
    cache_[key] = o;
    std::vector<std::string> zn;
    for (int c : zs) zn.push_back(var_name(c));
    log("indicator_ci_corrected", "R_" + var_name(rVar), var_name(v), zn, true, o);
    return o;
}

// ---- oracle engine -----------------------------------------------------------

OracleCiEngine::OracleCiEngine(const MGraph& truth) : truth_(truth) {
    vars_ = truth_.substantive_nodes();
}

std::vector<int> OracleCiEngine::partially_observed_vars() const {
    std::vector<int> out;
    for (int v = 0; v < num_vars(); ++v)
        if (truth_.partially_observed(vars_[v])) out.push_back(v);
    return out;
}

CITestOutcome OracleCiEngine::query(int x, int y, const std::vector<int>& z,
                                    const std::vector<int>& extra) {
    std::vector<int> cond;
    for (int c : z) cond.push_back(vars_.at(c));
    cond.insert(cond.end(), extra.begin(), extra.end());
    return oracle_ci_test(truth_, x, y, cond);
}

CITestOutcome OracleCiEngine::ci(int x, int y, const std::vector<int>& z) {
    // test-wise deletion conditions on the indicators of every involved column
    std::vector<int> extra;
    auto add = [&](int c) {
        int r = truth_.indicator_of(vars_.at(c));
        if (r >= 0) extra.push_back(r);
    };
    add(x); add(y);
    for (int c : z) add(c);
    CITestOutcome o = query(vars_.at(x), vars_.at(y), z, extra);
    std::vector<std::string> zn;
    for (int c : z) zn.push_back(var_name(c));
    log("ci", var_name(x), var_name(y), zn, false, o);
    return o;
}

CITestOutcome OracleCiEngine::ci_corrected(int x, int y, const std::vector<int>& z,
                                           const Pattern& hyp) {
    // reweighting removes the conditioning of non-self-masking indicators;
    // what remains conditioned are the hypothesized self-masking ones
    std::vector<int> extra;
    auto add = [&](int c) {
        int r = truth_.indicator_of(vars_.at(c));
        if (r >= 0 && pattern_marks_self_masking(hyp, c)) extra.push_back(r);
    };
    add(x); add(y);
    for (int c : z) add(c);
    CITestOutcome o = query(vars_.at(x), vars_.at(y), z, extra);
    o.weightsUsed = true;
    std::vector<std::string> zn;
    for (int c : z) zn.push_back(var_name(c));
    log("ci_corrected", var_name(x), var_name(y), zn, true, o);
    return o;
}

CITestOutcome OracleCiEngine::indicator_ci(int rVar, int v, const std::vector<int>& z) {
    CITestOutcome o;
    int r = truth_.indicator_of(vars_.at(rVar));
    if (r < 0) throw std::invalid_argument("variable has no indicator");
    if (v == rVar) {
        o = CITestOutcome{0.0, 1.0, true, 0, false}; // constant after deletion: untestable
    } else {
        std::vector<int> extra;
        auto add = [&](int c) {
            int rc = truth_.indicator_of(vars_.at(c));
            if (rc >= 0) extra.push_back(rc);
        };
        add(v);
        for (int c : z) add(c);
        o = query(r, vars_.at(v), z, extra);
    }
    std::vector<std::string> zn;
    for (int c : z) zn.push_back(var_name(c));
    log("indicator_ci", "R_" + var_name(rVar), var_name(v), zn, false, o);
    return o;
}

CITestOutcome OracleCiEngine::indicator_ci_corrected(int rVar, int v, const std::vector<int>& z,
                                                     const Pattern& hyp) {
    CITestOutcome o;
    int r = truth_.indicator_of(vars_.at(rVar));
    if (r < 0) throw std::invalid_argument("variable has no indicator");
    if (v == rVar) {
        o = CITestOutcome{0.0, 1.0, true, 0, true};
    } else {
        std::vector<int> extra;
        auto add = [&](int c) {
            int rc = truth_.indicator_of(vars_.at(c));
            if (rc >= 0 && pattern_marks_self_masking(hyp, c)) extra.push_back(rc);
        };
        add(v);
        for (int c : z) add(c);
        o = query(r, vars_.at(v), z, extra);
        o.weightsUsed = true;
    }
    std::vector<std::string> zn;
    for (int c : z) zn.push_back(var_name(c));
    log("indicator_ci_corrected", "R_" + var_name(rVar), var_name(v), zn, true, o);
    return o;
}

// ---- stages ------------------------------------------------------------------

std::vector<Node> skeleton_nodes(const CiEngine& engine) {
    std::vector<Node> nodes;
    const int m = engine.num_vars();
    for (int v = 0; v < m; ++v) nodes.push_back({engine.var_name(v), NodeKind::Substantive, -1});
    for (int v : engine.partially_observed_vars())
        nodes.push_back({"R_" + engine.var_name(v), NodeKind::Indicator, v});
    return nodes;
}

std::pair<Pattern, SepSetTable> pc_skeleton_deleted(CiEngine& engine, const SkeletonOptions& opts) {
    const int m = engine.num_vars();
    if (m < 2) {
        Pattern trivial(skeleton_nodes(engine), {}, {});
        return {trivial, {}};
    }
    std::vector<std::pair<int, int>> und;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) und.emplace_back(i, j);
    Pattern pat(skeleton_nodes(engine), {}, und);
    SepSetTable seps;
    const std::uint64_t substantive = (m >= 64) ? ~0ULL : ((1ULL << m) - 1);

    for (int level = 0; level <= opts.maxCond; ++level) {
        const Pattern snapshot = pat;
        bool anyCandidate = false;
        std::vector<std::tuple<int, int, std::vector<int>>> removals;
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                if (!snapshot.has_undirected(i, j)) continue;
                std::vector<int> poolI = sorted_masked(snapshot.adjacency_mask(i), substantive & ~bits::one(j));
                std::vector<int> poolJ = sorted_masked(snapshot.adjacency_mask(j), substantive & ~bits::one(i));
                if (static_cast<int>(poolI.size()) >= level || static_cast<int>(poolJ.size()) >= level)
                    anyCandidate = true;
                std::set<std::vector<int>> tried;
                bool separated = false;
                for (const auto& pool : {poolI, poolJ}) {
                    if (separated) break;
                    for_each_combination(pool, level, [&](const std::vector<int>& S) {
                        if (!tried.insert(S).second) return false;
                        try {
                            CITestOutcome o = engine.ci(i, j, S);
                            if (o.independent) {
                                removals.emplace_back(i, j, S);
                                separated = true;
                                return true;
                            }
                        } catch (const insufficient_data&) {
                        } catch (const empty_after_deletion&) {
                        }
                        return false;
                    });
                }
            }
        }
        for (auto& [i, j, S] : removals) {
            pat = pat.with_undirected_removed(i, j);
            seps[{i, j}] = S;
        }
        if (!anyCandidate) break;
    }
    return {pat, seps};
}

Pattern detect_indicator_parents(CiEngine& engine, const Pattern& p, const SkeletonOptions& opts) {
    Pattern pat = p;
    const int m = engine.num_vars();
    const std::uint64_t substantive = (m >= 64) ? ~0ULL : ((1ULL << m) - 1);
    for (int k : engine.partially_observed_vars()) {
        int r = pat.indicator_of(k);
        std::vector<int> parents;
        for (int j = 0; j < m; ++j) {
            if (j == k) continue;
            // V_k itself is never conditioned on: deleting on it would make
            // R_k constant and the test vacuous
            std::vector<int> pool = sorted_masked(p.adjacency_mask(j), substantive & ~(bits::one(k) | bits::one(j)));
            bool separated = false;
            for (int s = 0; s <= opts.maxCond && !separated; ++s) {
                for_each_combination(pool, s, [&](const std::vector<int>& S) {
                    try {
                        CITestOutcome o = engine.indicator_ci(k, j, S);
                        if (o.independent) { separated = true; return true; }
                    } catch (const insufficient_data&) {
                    } catch (const empty_after_deletion&) {
                    }
                    return false;
                });
            }
            if (!separated) parents.push_back(j);
        }
        pat = pat.with_indicator_parents(r, parents);
    }
    return pat;
}

std::pair<std::vector<int>, Pattern> detect_self_masking(CiEngine& engine, const Pattern& p,
                                                         const SepSetTable& sepsets,
                                                         const SkeletonOptions& opts) {
    Pattern pat = p;
    const int m = engine.num_vars();
    const std::uint64_t substantive = (m >= 64) ? ~0ULL : ((1ULL << m) - 1);
    std::vector<int> flagged;

    bool progress = true;
    while (progress) {
        progress = false;
        for (int k : engine.partially_observed_vars()) {
            int r = pat.indicator_of(k);
            if (pattern_marks_self_masking(pat, k)) continue;
            std::vector<int> parents = sorted_masked(pat.directed_in(r), substantive);
            if (parents.size() < 2) continue;
            bool fired = false;
            for (std::size_t ai = 0; ai < parents.size() && !fired; ++ai) {
                for (std::size_t bi = ai + 1; bi < parents.size() && !fired; ++bi) {
                    int a = parents[ai], b = parents[bi];
                    if (pat.adjacent(a, b)) continue;
                    // reuse the separating set recorded by the PC stage when
                    // it already conditions on V_k (Lemma condition (i))
                    if (auto it = sepsets.find({std::min(a, b), std::max(a, b)}); it != sepsets.end()) {
                        const auto& S = it->second;
                        if (std::find(S.begin(), S.end(), k) != S.end()) {
                            try {
                                if (engine.ci(a, b, S).independent) { fired = true; break; }
                            } catch (const insufficient_data&) {
                            } catch (const empty_after_deletion&) {
                            }
                        }
                    }
                    std::uint64_t poolMask = (pat.adjacency_mask(a) | pat.adjacency_mask(b)) &
                                             substantive & ~(bits::one(a) | bits::one(b) | bits::one(k));
                    std::vector<int> pool = bits::to_vector(poolMask);
                    Pattern hyp = pat.with_indicator_parents(r, {k});
                    for (int s = 0; s + 1 <= opts.maxCond && !fired; ++s) {
                        for_each_combination(pool, s, [&](const std::vector<int>& T) {
                            std::vector<int> S = T;
                            S.push_back(k);
                            std::sort(S.begin(), S.end());
                            try {
                                if (engine.ci(a, b, S).independent) { fired = true; return true; }
                                if (engine.ci_corrected(a, b, S, hyp).independent) { fired = true; return true; }
                            } catch (const insufficient_data&) {
                            } catch (const empty_after_deletion&) {
                            }
                            return false;
                        });
                    }
                }
            }
            if (fired) {
                pat = pat.with_indicator_parents(r, {k});
                flagged.push_back(r);
                progress = true;
            }
        }
    }
    return {flagged, pat};
}

SkeletonResult correct_extraneous_edges(CiEngine& engine, const Pattern& p, const SepSetTable& sepsets,
                                        const SkeletonOptions& opts) {
    Pattern pat = p;
    SepSetTable seps = sepsets;
    const int m = engine.num_vars();
    const std::uint64_t substantive = (m >= 64) ? ~0ULL : ((1ULL << m) - 1);
    bool converged = false;

    for (int sweep = 0; sweep < opts.correctionSweeps; ++sweep) {
        bool changed = false;

        // corrected re-tests of adjacent substantive pairs that share a
        // common adjacent variable or indicator child
        {
            const Pattern snapshot = pat;
            std::vector<std::tuple<int, int, std::vector<int>>> removals;
            for (int i = 0; i < m; ++i) {
                for (int j = i + 1; j < m; ++j) {
                    if (!snapshot.has_undirected(i, j)) continue;
                    bool commonVar = (snapshot.adjacency_mask(i) & snapshot.adjacency_mask(j) & substantive) != 0;
                    bool commonInd = (snapshot.directed_out(i) & snapshot.directed_out(j) & ~substantive) != 0;
                    if (!commonVar && !commonInd) continue;
                    std::vector<int> poolI = sorted_masked(snapshot.adjacency_mask(i), substantive & ~bits::one(j));
                    std::vector<int> poolJ = sorted_masked(snapshot.adjacency_mask(j), substantive & ~bits::one(i));
                    std::set<std::vector<int>> tried;
                    bool separated = false;
                    for (int s = 0; s <= opts.maxCond && !separated; ++s) {
                        for (const auto& pool : {poolI, poolJ}) {
                            if (separated) break;
                            for_each_combination(pool, s, [&](const std::vector<int>& S) {
                                if (!tried.insert(S).second) return false;
                                try {
                                    if (engine.ci_corrected(i, j, S, snapshot).independent) {
                                        removals.emplace_back(i, j, S);
                                        separated = true;
                                        return true;
                                    }
                                } catch (const insufficient_data&) {
                                } catch (const empty_after_deletion&) {
                                }
                                return false;
                            });
                        }
                    }
                }
            }
            for (auto& [i, j, S] : removals) {
                pat = pat.with_undirected_removed(i, j);
                seps[{i, j}] = S;
                changed = true;
            }
        }

        // corrected re-tests of detected indicator parents
        {
            const Pattern snapshot = pat;
            for (int k : engine.partially_observed_vars()) {
                if (pattern_marks_self_masking(snapshot, k)) continue;
                int r = snapshot.indicator_of(k);
                std::vector<int> parents = sorted_masked(snapshot.directed_in(r), substantive);
                for (int j : parents) {
                    std::uint64_t poolMask = (snapshot.adjacency_mask(j) | snapshot.directed_in(r)) &
                                             substantive & ~(bits::one(j) | bits::one(k));
                    std::vector<int> pool = bits::to_vector(poolMask);
                    bool separated = false;
                    for (int s = 0; s <= opts.maxCond && !separated; ++s) {
                        for_each_combination(pool, s, [&](const std::vector<int>& S) {
                            try {
                                if (engine.indicator_ci_corrected(k, j, S, snapshot).independent) {
                                    separated = true;
                                    return true;
                                }
                            } catch (const insufficient_data&) {
                            } catch (const empty_after_deletion&) {
                            }
                            return false;
                        });
                    }
                    if (separated) {
                        pat = pat.with_directed_removed(j, pat.indicator_of(k));
                        changed = true;
                    }
                }
            }
        }

        // newly exposed self-masking structure
        {
            auto [newFlags, updated] = detect_self_masking(engine, pat, seps, opts);
            pat = updated;
            if (!newFlags.empty()) changed = true;
        }

        if (!changed) { converged = true; break; }
    }

    SkeletonResult res{pat, seps, {}, {}, converged, engine.audit};
    for (int k : engine.partially_observed_vars()) {
        int r = pat.indicator_of(k);
        if (pattern_marks_self_masking(pat, k)) {
            res.selfMaskingIndicators.push_back(r);
        } else if (bits::count(pat.directed_in(r) & substantive) >= 2) {
            // self-masking cannot be excluded: the flag test is sufficient,
            // not necessary
            res.undeterminedIndicators.push_back(r);
        }
    }
    return res;
}

SkeletonResult sm_mvpc(CiEngine& engine, const SkeletonOptions& opts) {
    auto [pat, seps] = pc_skeleton_deleted(engine, opts);
    pat = detect_indicator_parents(engine, pat, opts);
    auto [flags, flaggedPat] = detect_self_masking(engine, pat, seps, opts);
    (void)flags;
    SkeletonResult res = correct_extraneous_edges(engine, flaggedPat, seps, opts);
    res.audit = engine.audit;
    return res;
}

SkeletonResult sm_mvpc(const Dataset& d, const TestConfig& cfg, const SkeletonOptions& opts) {
    StatisticalCiEngine engine(d, cfg);
    return sm_mvpc(engine, opts);
}

SkeletonResult sm_mvpc_oracle(const MGraph& truth, const SkeletonOptions& opts) {
    OracleCiEngine engine(truth);
    return sm_mvpc(engine, opts);
}

SkeletonResult tdpc_baseline(CiEngine& engine, const SkeletonOptions& opts) {
    auto [pat, seps] = pc_skeleton_deleted(engine, opts);
    return SkeletonResult{pat, seps, {}, {}, true, engine.audit};
}

SkeletonResult tdpc_baseline(const Dataset& d, const TestConfig& cfg, const SkeletonOptions& opts) {
    StatisticalCiEngine engine(d, cfg);
    return tdpc_baseline(engine, opts);
}

} // namespace lcsmd
