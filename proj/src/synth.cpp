#include "lcsmd/synth.hpp"

#include "lcsmd/rng.hpp"
#include "lcsmd/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lcsmd {

namespace {

// stream tags for the counter-based draws
constexpr std::uint64_t kStreamGraph = 1;
constexpr std::uint64_t kStreamMech = 2;
constexpr std::uint64_t kStreamMiss = 3;
constexpr std::uint64_t kStreamNoise = 4;
constexpr std::uint64_t kStreamMask = 5;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double draw_noise(NoiseLaw law, double scale, std::uint64_t seed, int row, int node) {
    std::uint64_t h1 = hash_mix(seed, kStreamNoise, static_cast<std::uint64_t>(row),
                                static_cast<std::uint64_t>(node));
    double u = u01(h1);
    switch (law) {
        case NoiseLaw::Uniform:
            return scale * (2.0 * u - 1.0);
        case NoiseLaw::Gaussian: {
            double u2 = u01(splitmix64(h1 + 1));
            if (u < 1e-300) u = 1e-300;
            return scale * std::sqrt(-2.0 * std::log(u)) *
                   std::cos(6.283185307179586476925286766559 * u2);
        }
        case NoiseLaw::Laplace: {
            double c = u - 0.5;
            double mag = std::log(1.0 - 2.0 * std::abs(c));
            return scale * (c < 0 ? mag : -mag) * 0.70710678118654752440;
        }
    }
    return 0.0;
}

// intercept such that the mean logistic rate over the calibration logits
// matches the target
double bisect_intercept(const std::vector<double>& logits, double target) {
    double lo = -40, hi = 40;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double rate = 0;
        for (double t : logits) rate += sigmoid(t + mid);
        rate /= static_cast<double>(logits.size());
        if (rate < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double quantile_of(std::vector<double> v, double q) {
    std::size_t k = static_cast<std::size_t>(q * (v.size() - 1));
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

} // namespace

std::vector<std::string> ScmSpec::names() const {
    std::vector<std::string> out;
    for (int i = 0; i < nVars; ++i) out.push_back("V" + std::to_string(i + 1));
    return out;
}

std::vector<int> ScmSpec::self_masking_vars() const {
    std::vector<int> out;
    for (const auto& [v, spec] : missingness)
        if (std::holds_alternative<SelfMaskingSpec>(spec)) out.push_back(v);
    return out;
}

MGraph ScmSpec::to_mgraph() const {
    std::vector<Node> nodes;
    auto nm = names();
    for (int i = 0; i < nVars; ++i) nodes.push_back({nm[i], NodeKind::Substantive, -1});
    std::vector<std::pair<int, int>> allEdges = edges;
    for (const auto& [v, spec] : missingness) {
        int r = static_cast<int>(nodes.size());
        nodes.push_back({"R_" + nm[v], NodeKind::Indicator, v});
        if (std::holds_alternative<SelfMaskingSpec>(spec)) {
            allEdges.emplace_back(v, r);
        } else if (const auto* pd = std::get_if<ParentDrivenSpec>(&spec)) {
            for (int p : pd->parents) allEdges.emplace_back(p, r);
        }
    }
    return MGraph(nodes, allEdges);
}

double mechanism_value(const ScmSpec& spec, int node, const Eigen::VectorXd& parentValues) {
    const Mechanism& mech = spec.mechanisms.at(node);
    if (std::holds_alternative<std::monostate>(mech)) return 0.0;
    if (const auto* mlp = std::get_if<MlpMechanism>(&mech)) {
        Eigen::VectorXd h = (mlp->w1 * parentValues + mlp->b1).array().tanh();
        return mlp->w2.dot(h);
    }
    return std::get<LinearMechanism>(mech).coef.dot(parentValues);
}

bool structural_condition_holds(const MGraph& truth, int maxCond) {
    std::vector<int> selfMasking;
    for (int v : truth.substantive_nodes()) {
        int r = truth.indicator_of(v);
        if (r >= 0 && truth.parents_mask(r) == bits::one(v)) selfMasking.push_back(v);
    }
    if (selfMasking.empty()) return true;
    // run the identification stages against the graph itself; every
    // self-masking indicator must come out flagged
    SkeletonOptions opts;
    opts.maxCond = maxCond;
    OracleCiEngine engine(truth);
    auto [pat, seps] = pc_skeleton_deleted(engine, opts);
    pat = detect_indicator_parents(engine, pat, opts);
    auto [flags, flagged] = detect_self_masking(engine, pat, seps, opts);
    for (int v : selfMasking)
        if (!pattern_marks_self_masking(flagged, v)) return false;
    return true;
}

namespace {

// One attempt at a spec. Self-masking variables take the front of a seeded
// priority order, parent-driven ones the back, so specs with growing
// self-masking counts nest when drawn from the same attempt.
ScmSpec build_spec(std::uint64_t s, std::uint64_t publicSeed, int nVars, int nSelfMasking,
                   int nParentDriven, const SpecOptions& opts) {
    ScmSpec spec;
    spec.nVars = nVars;
    spec.seed = publicSeed;
    spec.noiseScale = 1.0;
    spec.noise.assign(nVars, opts.noise);

    const double p = std::min(1.0, nVars > 1 ? opts.expectedDegree / (nVars - 1) : 0.0);
    for (int i = 0; i < nVars; ++i)
        for (int j = i + 1; j < nVars; ++j)
            if (u01(hash_mix(s, kStreamGraph, static_cast<std::uint64_t>(i),
                             static_cast<std::uint64_t>(j))) < p)
                spec.edges.emplace_back(i, j);

    std::vector<std::vector<int>> parents(nVars);
    for (auto [a, b] : spec.edges) parents[b].push_back(a);

    spec.mechanisms.resize(nVars);
    for (int i = 0; i < nVars; ++i) {
        const int k = static_cast<int>(parents[i].size());
        if (k == 0) continue;
        SplitMix rng(hash_mix(s, kStreamMech, static_cast<std::uint64_t>(i)));
        if (opts.linearMechanisms) {
            LinearMechanism lin;
            lin.coef.resize(k);
            for (int c = 0; c < k; ++c) {
                double mag = rng.uniform(0.5, 1.5);
                lin.coef(c) = rng.uniform() < 0.5 ? -mag : mag;
            }
            spec.mechanisms[i] = lin;
        } else {
            MlpMechanism mlp;
            mlp.w1.resize(opts.mlpHidden, k);
            mlp.b1.resize(opts.mlpHidden);
            mlp.w2.resize(opts.mlpHidden);
            for (int h = 0; h < opts.mlpHidden; ++h) {
                for (int c = 0; c < k; ++c) mlp.w1(h, c) = rng.uniform(-1, 1);
                mlp.b1(h) = rng.uniform(-1, 1);
                mlp.w2(h) = rng.uniform(-1, 1);
            }
            for (int c = 0; c < k; ++c) {
                double norm = mlp.w1.col(c).norm();
                if (norm > 0) mlp.w1.col(c) *= std::sqrt(static_cast<double>(opts.mlpHidden)) / norm;
            }
            double norm = mlp.w2.norm();
            if (norm > 0) mlp.w2 *= 2.0 / norm;
            spec.mechanisms[i] = mlp;
        }
    }

    std::vector<int> order(nVars);
    for (int i = 0; i < nVars; ++i) order[i] = i;
    SplitMix missRng(hash_mix(s, kStreamMiss));
    shuffle_inplace(order, missRng);

    // parent-driven sets are drawn for the whole back of the order up front,
    // so they do not shift as the self-masking count changes
    std::vector<ParentDrivenSpec> pdSpecs(nVars);
    for (int i = 0; i < nVars; ++i) {
        int v = order[nVars - 1 - i];
        ParentDrivenSpec pd;
        pd.targetRate = opts.targetMissingRate;
        std::vector<int> pool;
        for (int c = 0; c < nVars; ++c)
            if (c != v) pool.push_back(c);
        shuffle_inplace(pool, missRng);
        int np = std::min<int>(opts.parentDrivenParents, static_cast<int>(pool.size()));
        pd.parents.assign(pool.begin(), pool.begin() + np);
        std::sort(pd.parents.begin(), pd.parents.end());
        pd.slopes.resize(np);
        for (int c = 0; c < np; ++c) {
            double mag = missRng.uniform(1.5, 2.5);
            pd.slopes(c) = missRng.uniform() < 0.5 ? -mag : mag;
        }
        pdSpecs[v] = pd;
    }

    for (int k = 0; k < nSelfMasking; ++k) {
        SelfMaskingSpec sm;
        sm.slope = 3.0;
        sm.hardThreshold = opts.hardThresholdSelfMasking;
        sm.targetRate = opts.targetMissingRate;
        spec.missingness[order[k]] = sm;
    }
    for (int k = 0; k < nParentDriven; ++k) {
        int v = order[nVars - 1 - k];
        spec.missingness[v] = pdSpecs[v];
    }
    return spec;
}

} // namespace

ScmSpec random_spec(int nVars, int nMissingVars, int nSelfMasking, std::uint64_t seed,
                    const SpecOptions& opts) {
    if (nVars < 1) throw std::invalid_argument("need at least one variable");
    if (nSelfMasking > nMissingVars || nMissingVars > nVars)
        throw std::invalid_argument("need nSelfMasking <= nMissingVars <= nVars");
    if (nVars > 60) throw std::invalid_argument("too many variables");
    if (nSelfMasking + (nMissingVars - nSelfMasking) > nVars)
        throw std::invalid_argument("missingness exceeds variable count");

    const int nPd = nMissingVars - nSelfMasking;
    for (int attempt = 0; attempt < opts.rejectionBudget; ++attempt) {
        std::uint64_t s = hash_mix(seed, 0x73706563ULL, static_cast<std::uint64_t>(attempt));
        ScmSpec spec = build_spec(s, seed, nVars, nSelfMasking, nPd, opts);
        if (nSelfMasking == 0 || structural_condition_holds(spec.to_mgraph(), opts.structuralMaxCond)) {
            spec.structuralConditionVerified = nSelfMasking > 0;
            return spec;
        }
    }
    throw structural_condition_unsatisfiable(
        "no spec with a detectable self-masking structure within the rejection budget");
}

std::vector<ScmSpec> nested_sweep_specs(int nVars, int nParentDriven,
                                        const std::vector<int>& selfMaskingGrid,
                                        std::uint64_t seed, const SpecOptions& opts) {
    if (selfMaskingGrid.empty()) throw std::invalid_argument("empty self-masking grid");
    int maxSm = *std::max_element(selfMaskingGrid.begin(), selfMaskingGrid.end());
    if (maxSm + nParentDriven > nVars)
        throw std::invalid_argument("missingness exceeds variable count");

    for (int attempt = 0; attempt < opts.rejectionBudget; ++attempt) {
        std::uint64_t s = hash_mix(seed, 0x73706563ULL, static_cast<std::uint64_t>(attempt));
        std::vector<ScmSpec> specs;
        bool ok = true;
        for (int k : selfMaskingGrid) {
            ScmSpec spec = build_spec(s, seed, nVars, k, nParentDriven, opts);
            if (k > 0 && !structural_condition_holds(spec.to_mgraph(), opts.structuralMaxCond)) {
                ok = false;
                break;
            }
            spec.structuralConditionVerified = k > 0;
            specs.push_back(std::move(spec));
        }
        if (ok) return specs;
    }
    throw structural_condition_unsatisfiable(
        "no nested sweep spec satisfies the structural condition within the budget");
}

GeneratedBatch sample(const ScmSpec& spec, int n) {
    if (n < 1) throw std::invalid_argument("need at least one sample");
    const int m = spec.nVars;

    std::vector<std::vector<int>> parents(m);
    for (auto [a, b] : spec.edges) {
        if (a >= b) throw std::invalid_argument("spec edges must follow the index order");
        parents[b].push_back(a);
    }
    for (auto& ps : parents) std::sort(ps.begin(), ps.end());

    Eigen::MatrixXd values(n, m);
    for (int r = 0; r < n; ++r) {
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd pv(parents[i].size());
            for (std::size_t j = 0; j < parents[i].size(); ++j) pv(static_cast<int>(j)) = values(r, parents[i][j]);
            values(r, i) = mechanism_value(spec, i, pv) +
                           draw_noise(spec.noise[i], spec.noiseScale, spec.seed, r, i);
        }
    }

    // resolve missingness parameters on a fixed calibration prefix so masks
    // are stable under sample-size extension
    ScmSpec resolved = spec;
    const int nCal = std::min(n, 3000);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * m, 0);
    std::vector<std::string> warnings;

    for (auto& [v, ms] : resolved.missingness) {
        if (auto* sm = std::get_if<SelfMaskingSpec>(&ms)) {
            std::vector<double> calib(nCal);
            for (int r = 0; r < nCal; ++r) calib[r] = values(r, v);
            double mean = 0;
            for (double x : calib) mean += x;
            mean /= nCal;
            double var = 0;
            for (double x : calib) var += (x - mean) * (x - mean);
            double sd = nCal > 1 ? std::sqrt(var / nCal) : 1.0;
            if (sd <= 0) sd = 1.0;
            sm->mean = mean;
            sm->sd = sd;
            if (sm->hardThreshold) {
                sm->threshold = quantile_of(calib, 1.0 - sm->targetRate);
                for (int r = 0; r < n; ++r)
                    if (values(r, v) > sm->threshold) mask[static_cast<std::size_t>(r) * m + v] = 1;
            } else {
                std::vector<double> logits(nCal);
                for (int r = 0; r < nCal; ++r) logits[r] = sm->slope * (calib[r] - mean) / sd;
                sm->intercept = bisect_intercept(logits, sm->targetRate);
                for (int r = 0; r < n; ++r) {
                    double t = sm->slope * (values(r, v) - mean) / sd + sm->intercept;
                    double u = u01(hash_mix(spec.seed, kStreamMask, static_cast<std::uint64_t>(r),
                                            static_cast<std::uint64_t>(v)));
                    if (u < sigmoid(t)) mask[static_cast<std::size_t>(r) * m + v] = 1;
                }
            }
            sm->resolved = true;
        } else if (auto* pd = std::get_if<ParentDrivenSpec>(&ms)) {
            const int k = static_cast<int>(pd->parents.size());
            pd->mean.resize(k);
            pd->sd.resize(k);
            for (int c = 0; c < k; ++c) {
                double mean = 0;
                for (int r = 0; r < nCal; ++r) mean += values(r, pd->parents[c]);
                mean /= nCal;
                double var = 0;
                for (int r = 0; r < nCal; ++r) {
                    double dlt = values(r, pd->parents[c]) - mean;
                    var += dlt * dlt;
                }
                pd->mean(c) = mean;
                pd->sd(c) = var > 0 ? std::sqrt(var / nCal) : 1.0;
            }
            auto logit_of = [&](int r) {
                double t = 0;
                for (int c = 0; c < k; ++c)
                    t += pd->slopes(c) * (values(r, pd->parents[c]) - pd->mean(c)) / pd->sd(c);
                return t;
            };
            std::vector<double> logits(nCal);
            for (int r = 0; r < nCal; ++r) logits[r] = logit_of(r);
            pd->intercept = bisect_intercept(logits, pd->targetRate);
            for (int r = 0; r < n; ++r) {
                double u = u01(hash_mix(spec.seed, kStreamMask, static_cast<std::uint64_t>(r),
                                        static_cast<std::uint64_t>(v)));
                if (u < sigmoid(logit_of(r) + pd->intercept)) mask[static_cast<std::size_t>(r) * m + v] = 1;
            }
            pd->resolved = true;
        } else {
            double rate = std::get<McarSpec>(ms).rate;
            for (int r = 0; r < n; ++r) {
                double u = u01(hash_mix(spec.seed, kStreamMask, static_cast<std::uint64_t>(r),
                                        static_cast<std::uint64_t>(v)));
                if (u < rate) mask[static_cast<std::size_t>(r) * m + v] = 1;
            }
        }

        if (n >= 3000) {
            double target = 0.0;
            if (auto* sm = std::get_if<SelfMaskingSpec>(&ms)) target = sm->targetRate;
            else if (auto* pd = std::get_if<ParentDrivenSpec>(&ms)) target = pd->targetRate;
            else target = std::get<McarSpec>(ms).rate;
            double achieved = 0;
            for (int r = 0; r < n; ++r) achieved += mask[static_cast<std::size_t>(r) * m + v];
            achieved /= n;
            if (std::abs(achieved - target) > 0.05)
                warnings.push_back("missing rate for " + spec.names()[v] + " off target: " +
                                   std::to_string(achieved));
        }
    }

    GeneratedBatch batch{Dataset(values, mask, spec.names()), values, resolved, warnings};
    return batch;
}

Eigen::MatrixXd noise_values(const GeneratedBatch& batch) {
    const ScmSpec& spec = batch.spec;
    const int n = static_cast<int>(batch.completeValues.rows());
    const int m = spec.nVars;
    std::vector<std::vector<int>> parents(m);
    for (auto [a, b] : spec.edges) parents[b].push_back(a);
    for (auto& ps : parents) std::sort(ps.begin(), ps.end());

    Eigen::MatrixXd eps(n, m);
    for (int r = 0; r < n; ++r)
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd pv(parents[i].size());
            for (std::size_t j = 0; j < parents[i].size(); ++j)
                pv(static_cast<int>(j)) = batch.completeValues(r, parents[i][j]);
            eps(r, i) = batch.completeValues(r, i) - mechanism_value(spec, i, pv);
        }
    return eps;
}

} // namespace lcsmd
