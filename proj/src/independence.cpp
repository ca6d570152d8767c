#include "lcsmd/independence.hpp"

#include "lcsmd/kernel_ridge.hpp"
#include "lcsmd/rng.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lcsmd {

void TestConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (pValueMethod == PValueMethod::Permutation && permutationCount < 100)
        throw std::invalid_argument("permutation count must be at least 100");
    if (minEffectiveN < 4) throw std::invalid_argument("minEffectiveN too small");
    if (maxKernelSamples < minEffectiveN)
        throw std::invalid_argument("maxKernelSamples below minEffectiveN");
    if (bandwidth == BandwidthRule::Fixed && fixedBandwidth <= 0)
        throw std::invalid_argument("fixed bandwidth must be positive");
}

std::uint64_t ci_test_seed(std::uint64_t base, int x, int y, const std::vector<int>& z) {
    std::vector<int> zs = z;
    std::sort(zs.begin(), zs.end());
    std::uint64_t h = hash_mix(base, 0x63697465ULL, static_cast<std::uint64_t>(std::min(x, y)),
                               static_cast<std::uint64_t>(std::max(x, y)));
    for (int c : zs) h = hash_mix(h, static_cast<std::uint64_t>(c) + 101);
    return h;
}

std::vector<int> evenly_spaced_subsample(int n, int cap) {
    std::vector<int> idx;
    if (n <= cap) {
        idx.resize(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    idx.resize(cap);
    for (int i = 0; i < cap; ++i)
        idx[i] = static_cast<int>((static_cast<std::int64_t>(i) * n) / cap);
    return idx;
}

Eigen::MatrixXd gaussian_kernel_matrix(const Eigen::VectorXd& x, const TestConfig& cfg) {
    const int n = static_cast<int>(x.size());
    double sigma = cfg.bandwidth == BandwidthRule::Fixed ? cfg.fixedBandwidth
                                                         : median_pairwise_distance(x);
    if (sigma <= 0) sigma = 1.0;
    const double inv = 1.0 / (2.0 * sigma * sigma);
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            double d = x(i) - x(j);
            K(i, j) = K(j, i) = std::exp(-d * d * inv);
        }
    }
    return K;
}

Eigen::MatrixXd delta_kernel_matrix(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) K(i, j) = x(i) == x(j) ? 1.0 : 0.0;
    return K;
}

namespace {

struct WeightedHsic {
    double statistic;   // V-statistic under the (possibly reweighted) measure
    double testStat;    // n_eff * statistic, the gamma-approximated quantity
    double meanH0;      // gamma moments of the statistic under independence
    double varH0;
    double nEff;
};

Eigen::VectorXd normalized_probs(int n, const Eigen::VectorXd* weights) {
    if (weights) {
        if (weights->size() != n) throw std::invalid_argument("weight length mismatch");
        if (weights->minCoeff() < 0) throw std::invalid_argument("weights must be nonnegative");
        double s = weights->sum();
        if (s <= 0) throw std::invalid_argument("weights must not all be zero");
        bool equal = true;
        for (int i = 1; i < n && equal; ++i) equal = (*weights)(i) == (*weights)(0);
        if (!equal) return *weights / s;
    }
    return Eigen::VectorXd::Constant(n, 1.0 / n);
}

// weighted centering: Kc(i,j) = K(i,j) - m_i - m_j + mm with m = K p
Eigen::MatrixXd center(const Eigen::MatrixXd& K, const Eigen::VectorXd& p) {
    Eigen::VectorXd m = K * p;
    double mm = p.dot(m);
    Eigen::MatrixXd Kc = K;
    Kc.colwise() -= m;
    Kc.rowwise() -= m.transpose();
    Kc.array() += mm;
    return Kc;
}

WeightedHsic weighted_hsic(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L,
                           const Eigen::VectorXd& p) {
    const int n = static_cast<int>(p.size());
    Eigen::MatrixXd Kc = center(K, p);
    Eigen::MatrixXd Lc = center(L, p);

    Eigen::MatrixXd H = Kc.cwiseProduct(Lc);
    double stat = p.dot(H * p);

    const double sumP2 = p.squaredNorm();
    const double ne = 1.0 / sumP2;
    const double s2 = 1.0 - sumP2; // sum over i != j of p_i p_j

    // moments of the null gamma approximation
    auto offdiag_mean = [&](const Eigen::MatrixXd& M) {
        double total = p.dot(M * p);
        double diag = 0;
        for (int i = 0; i < n; ++i) diag += p(i) * p(i) * M(i, i);
        return (total - diag) / s2;
    };
    double muX = offdiag_mean(K);
    double muY = offdiag_mean(L);
    double meanH0 = (1.0 + muX * muY - muX - muY) / ne;

    Eigen::MatrixXd H2 = H.cwiseProduct(H);
    double varNum = offdiag_mean(H2);
    double varH0 = 0.0;
    if (ne > 5.0)
        varH0 = 2.0 * (ne - 4.0) * (ne - 5.0) / (ne * (ne - 1.0) * (ne - 2.0) * (ne - 3.0)) * varNum;

    return {stat, ne * stat, meanH0, varH0, ne};
}

double permutation_pvalue(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L,
                          const Eigen::VectorXd& p, double observed, int count,
                          std::uint64_t seed) {
    const int n = static_cast<int>(p.size());
    SplitMix rng(hash_mix(seed, 0x7065726dULL));
    std::vector<int> perm(n);
    int exceed = 0;
    for (int b = 0; b < count; ++b) {
        for (int i = 0; i < n; ++i) perm[i] = i;
        shuffle_inplace(perm, rng);
        Eigen::MatrixXd Lp(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Lp(i, j) = L(perm[i], perm[j]);
        WeightedHsic h = weighted_hsic(K, Lp, p);
        if (h.statistic >= observed) ++exceed;
    }
    return (1.0 + exceed) / (count + 1.0);
}

CITestOutcome degenerate_independent(int effectiveN, bool weightsUsed) {
    return CITestOutcome{0.0, 1.0, true, effectiveN, weightsUsed};
}

} // namespace

CITestOutcome hsic_from_kernels(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L,
                                const Eigen::VectorXd* weights, const TestConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(K.rows());
    if (K.cols() != n || L.rows() != n || L.cols() != n)
        throw std::invalid_argument("kernel matrices must be square and same size");
    Eigen::VectorXd p = normalized_probs(n, weights);
    WeightedHsic h = weighted_hsic(K, L, p);

    CITestOutcome out;
    out.statistic = h.statistic;
    out.effectiveN = n;
    out.weightsUsed = weights != nullptr;

    if (cfg.pValueMethod == PValueMethod::Permutation) {
        out.pValue = permutation_pvalue(K, L, p, h.statistic, cfg.permutationCount, cfg.seed);
    } else {
        if (h.meanH0 <= 0 || h.varH0 <= 0 || !(h.testStat > 0)) {
            out.pValue = 1.0;
        } else {
            double shape = h.meanH0 * h.meanH0 / h.varH0;
            double scale = h.varH0 * h.nEff / h.meanH0;
            boost::math::gamma_distribution<double> dist(shape, scale);
            out.pValue = boost::math::cdf(boost::math::complement(dist, h.testStat));
        }
    }
    out.independent = out.pValue > cfg.alpha;
    return out;
}

CITestOutcome hsic_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd* weights, const TestConfig& cfg) {
    cfg.validate();
    if (x.size() != y.size()) throw std::invalid_argument("vector length mismatch");
    const int n = static_cast<int>(x.size());
    if (n < cfg.minEffectiveN) throw insufficient_data("too few samples for HSIC");

    // evenly spaced cap keeps kernel cost bounded
    std::vector<int> idx = evenly_spaced_subsample(n, cfg.maxKernelSamples);
    Eigen::VectorXd xs(idx.size()), ys(idx.size());
    Eigen::VectorXd ws;
    if (weights) {
        if (weights->size() != n) throw std::invalid_argument("weight length mismatch");
        ws.resize(idx.size());
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
        xs(static_cast<int>(i)) = x(idx[i]);
        ys(static_cast<int>(i)) = y(idx[i]);
        if (weights) ws(static_cast<int>(i)) = (*weights)(idx[i]);
    }

    Eigen::MatrixXd K = gaussian_kernel_matrix(xs, cfg);
    Eigen::MatrixXd L = gaussian_kernel_matrix(ys, cfg);
    CITestOutcome out = hsic_from_kernels(K, L, weights ? &ws : nullptr, cfg);
    out.effectiveN = n;
    return out;
}

namespace {

CITestOutcome fisher_z_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& Z, const Eigen::VectorXd* weights,
                            const TestConfig& cfg) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd w = weights ? *weights : Eigen::VectorXd::Ones(n);
    w /= w.sum();

    // residualize on [1, Z] by weighted least squares
    Eigen::MatrixXd D(n, Z.cols() + 1);
    D.col(0).setOnes();
    if (Z.cols() > 0) D.rightCols(Z.cols()) = Z;
    Eigen::MatrixXd Dw = w.asDiagonal() * D;
    Eigen::MatrixXd G = D.transpose() * Dw;
    G.diagonal().array() += 1e-10;
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    Eigen::VectorXd rx = x - D * llt.solve(Dw.transpose() * x);
    Eigen::VectorXd ry = y - D * llt.solve(Dw.transpose() * y);

    double sxx = rx.cwiseProduct(w).dot(rx);
    double syy = ry.cwiseProduct(w).dot(ry);
    double sxy = rx.cwiseProduct(w).dot(ry);
    CITestOutcome out;
    out.effectiveN = n;
    out.weightsUsed = weights != nullptr;
    if (sxx <= 0 || syy <= 0) return degenerate_independent(n, out.weightsUsed);
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -0.999999, 0.999999);
    double dof = n - static_cast<int>(Z.cols()) - 3;
    if (dof < 1) dof = 1;
    double stat = std::abs(0.5 * std::log((1 + r) / (1 - r))) * std::sqrt(dof);
    boost::math::normal_distribution<double> norm;
    out.statistic = r;
    out.pValue = 2.0 * boost::math::cdf(boost::math::complement(norm, stat));
    out.independent = out.pValue > cfg.alpha;
    return out;
}

bool is_constant(const Eigen::VectorXd& v) {
    for (int i = 1; i < v.size(); ++i)
        if (v(i) != v(0)) return false;
    return true;
}

} // namespace

CITestOutcome ci_test(const Dataset& d, int x, int y, const std::vector<int>& z,
                      const Eigen::VectorXd* weights, const TestConfig& cfg) {
    cfg.validate();
    if (x == y) throw std::invalid_argument("x and y must differ");
    for (int c : z)
        if (c == x || c == y) throw std::invalid_argument("conditioning set contains a tested column");

    std::vector<int> cols = {x, y};
    cols.insert(cols.end(), z.begin(), z.end());
    std::vector<int> rows = observed_rows(d, cols);
    if (rows.empty()) throw empty_after_deletion();
    const int effN = static_cast<int>(rows.size());
    if (effN < cfg.minEffectiveN)
        throw insufficient_data("only " + std::to_string(effN) + " rows after deletion");
    if (weights && weights->size() != effN)
        throw std::invalid_argument("weights must match the deleted row count");

    // statistics are symmetric in (x, y); canonicalize so permutation draws
    // do not depend on argument order
    int cx = std::min(x, y), cy = std::max(x, y);

    TestConfig cfg2 = cfg;
    cfg2.seed = ci_test_seed(cfg.seed, x, y, z);

    std::vector<int> sub = evenly_spaced_subsample(effN, cfg.maxKernelSamples);
    std::vector<int> subRows(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) subRows[i] = rows[sub[i]];
    Eigen::VectorXd xv = extract_column(d, cx, subRows);
    Eigen::VectorXd yv = extract_column(d, cy, subRows);
    Eigen::VectorXd ws;
    if (weights) {
        ws.resize(sub.size());
        for (std::size_t i = 0; i < sub.size(); ++i) ws(static_cast<int>(i)) = (*weights)(sub[i]);
    }
    const Eigen::VectorXd* wptr = weights ? &ws : nullptr;

    CITestOutcome out;
    if (is_constant(xv) || is_constant(yv)) {
        out = degenerate_independent(effN, weights != nullptr);
        return out;
    }

    Eigen::MatrixXd Z(subRows.size(), z.size());
    for (std::size_t j = 0; j < z.size(); ++j)
        Z.col(static_cast<int>(j)) = extract_column(d, z[j], subRows);

    if (cfg.ciMethod == CiMethod::FisherZ) {
        out = fisher_z_test(xv, yv, Z, wptr, cfg2);
        out.effectiveN = effN;
        return out;
    }

    if (z.empty()) {
        out = hsic_from_kernels(gaussian_kernel_matrix(xv, cfg2), gaussian_kernel_matrix(yv, cfg2),
                                wptr, cfg2);
    } else {
        KernelRidge fx = KernelRidge::fit(Z, xv, wptr, hash_mix(cfg2.seed, 1));
        KernelRidge fy = KernelRidge::fit(Z, yv, wptr, hash_mix(cfg2.seed, 2));
        Eigen::VectorXd rx = fx.residuals(Z, xv);
        Eigen::VectorXd ry = fy.residuals(Z, yv);
        out = hsic_from_kernels(gaussian_kernel_matrix(rx, cfg2), gaussian_kernel_matrix(ry, cfg2),
                                wptr, cfg2);
    }
    out.effectiveN = effN;
    out.weightsUsed = weights != nullptr;
    return out;
}

CITestOutcome indicator_ci_test(const Dataset& d, int rVar, int v, const std::vector<int>& z,
                                const TestConfig& cfg, const Eigen::VectorXd* weights) {
    cfg.validate();
    for (int c : z)
        if (c == v || c == rVar) throw std::invalid_argument("conditioning set overlaps tested columns");

    std::vector<int> cols = {v};
    cols.insert(cols.end(), z.begin(), z.end());
    std::vector<int> rows = observed_rows(d, cols);
    if (rows.empty()) throw empty_after_deletion();
    const int effN = static_cast<int>(rows.size());
    if (effN < cfg.minEffectiveN)
        throw insufficient_data("only " + std::to_string(effN) + " rows after deletion");
    if (weights && weights->size() != effN)
        throw std::invalid_argument("weights must match the deleted row count");

    TestConfig cfg2 = cfg;
    cfg2.seed = ci_test_seed(cfg.seed, -1 - rVar, v, z);

    std::vector<int> sub = evenly_spaced_subsample(effN, cfg.maxKernelSamples);
    std::vector<int> subRows(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) subRows[i] = rows[sub[i]];
    Eigen::VectorXd rv = extract_indicator(d, rVar, subRows);
    Eigen::VectorXd vv = extract_column(d, v, subRows);
    Eigen::VectorXd ws;
    if (weights) {
        ws.resize(sub.size());
        for (std::size_t i = 0; i < sub.size(); ++i) ws(static_cast<int>(i)) = (*weights)(sub[i]);
    }
    const Eigen::VectorXd* wptr = weights ? &ws : nullptr;

    CITestOutcome out;
    if (is_constant(rv) || is_constant(vv)) {
        // self-masking indicators are constant after deleting on their own
        // variable, so the relation is untestable and reads independent
        out = degenerate_independent(effN, weights != nullptr);
        return out;
    }

    if (z.empty()) {
        out = hsic_from_kernels(delta_kernel_matrix(rv), gaussian_kernel_matrix(vv, cfg2),
                                wptr, cfg2);
    } else {
        Eigen::MatrixXd Z(subRows.size(), z.size());
        for (std::size_t j = 0; j < z.size(); ++j)
            Z.col(static_cast<int>(j)) = extract_column(d, z[j], subRows);
        KernelRidge fr = KernelRidge::fit(Z, rv, wptr, hash_mix(cfg2.seed, 1));
        KernelRidge fv = KernelRidge::fit(Z, vv, wptr, hash_mix(cfg2.seed, 2));
        Eigen::VectorXd rr = fr.residuals(Z, rv);
        Eigen::VectorXd rw = fv.residuals(Z, vv);
        out = hsic_from_kernels(gaussian_kernel_matrix(rr, cfg2), gaussian_kernel_matrix(rw, cfg2),
                                wptr, cfg2);
    }
    out.effectiveN = effN;
    out.weightsUsed = weights != nullptr;
    return out;
}

CITestOutcome oracle_ci_test(const MGraph& g, int x, int y, const std::vector<int>& z) {
    bool indep = d_separated(g, x, y, z);
    CITestOutcome out;
    out.statistic = indep ? 0.0 : 1.0;
    out.pValue = indep ? 1.0 : 0.0;
    out.independent = indep;
    out.effectiveN = 0;
    out.weightsUsed = false;
    return out;
}

} // namespace lcsmd
