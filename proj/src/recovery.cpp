#include "lcsmd/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lcsmd {

namespace {

void check_pattern_matches(const Dataset& d, const Pattern& g) {
    auto sub = g.substantive_nodes();
    if (static_cast<int>(sub.size()) != d.d())
        throw std::invalid_argument("pattern and dataset disagree on variable count");
    for (int c = 0; c < d.d(); ++c)
        if (sub[c] != c || g.node(c).name != d.columns()[c])
            throw std::invalid_argument("pattern substantive nodes must come first and match dataset columns");
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

} // namespace

bool pattern_marks_self_masking(const Pattern& g, int var) {
    int r = g.indicator_of(var);
    if (r < 0) return false;
    return g.directed_in(r) == bits::one(var);
}

int PropensityModel::feature_count() const {
    int values = static_cast<int>(observedParents.size() + missingParents.size());
    return 2 * values + static_cast<int>(missingParents.size());
}

Eigen::VectorXd PropensityModel::features(const Dataset& d, int row) const {
    Eigen::VectorXd f(feature_count());
    int k = 0;
    auto push_value = [&](double std_value) {
        f(k) = std_value;
        f(k + 1) = std_value * std_value;
        k += 2;
    };
    for (int c : observedParents) {
        double z = (d.value(row, c) - featMean(k / 2)) / featStd(k / 2);
        push_value(z);
    }
    for (int c : missingParents) {
        double z = d.missing(row, c) ? 0.0 : (d.value(row, c) - featMean(k / 2)) / featStd(k / 2);
        push_value(z);
    }
    for (int c : missingParents) f(k++) = d.missing(row, c) ? 1.0 : 0.0;
    return f;
}

double PropensityModel::prob_observed(const Dataset& d, int row) const {
    Eigen::VectorXd f = features(d, row);
    double t = coef.head(f.size()).dot(f) + coef(f.size());
    return std::clamp(sigmoid(t), kClip, 1.0 - kClip);
}

PropensityModel fit_propensity(const Dataset& d, const Pattern& g, int indicatorNode) {
    check_pattern_matches(d, g);
    if (indicatorNode < 0 || indicatorNode >= g.num_nodes() ||
        g.node(indicatorNode).kind != NodeKind::Indicator)
        throw std::invalid_argument("not an indicator node");
    const int var = g.node(indicatorNode).of;
    if (pattern_marks_self_masking(g, var))
        throw std::invalid_argument("propensity of a self-masking indicator is not estimable");

    PropensityModel m;
    m.indicatorVar = var;
    bits::for_each(g.directed_in(indicatorNode), [&](int p) {
        if (!g.is_substantive(p)) return;
        if (d.column_has_missing(p)) m.missingParents.push_back(p);
        else m.observedParents.push_back(p);
    });

    // standardization over observed entries, per value feature
    const int nValues = static_cast<int>(m.observedParents.size() + m.missingParents.size());
    m.featMean.resize(std::max(nValues, 1));
    m.featStd.resize(std::max(nValues, 1));
    int slot = 0;
    auto standardize_col = [&](int c) {
        double sum = 0, sum2 = 0;
        int cnt = 0;
        for (int r = 0; r < d.n(); ++r) {
            if (d.missing(r, c)) continue;
            sum += d.value(r, c);
            sum2 += d.value(r, c) * d.value(r, c);
            ++cnt;
        }
        double mean = cnt > 0 ? sum / cnt : 0.0;
        double var = cnt > 0 ? std::max(sum2 / cnt - mean * mean, 0.0) : 0.0;
        m.featMean(slot) = mean;
        m.featStd(slot) = var > 0 ? std::sqrt(var) : 1.0;
        ++slot;
    };
    for (int c : m.observedParents) standardize_col(c);
    for (int c : m.missingParents) standardize_col(c);

    // IRLS logistic regression of (R_var == 0) on the features
    const int n = d.n();
    const int p = m.feature_count();
    Eigen::MatrixXd X(n, p + 1);
    Eigen::VectorXd t(n);
    m.coef = Eigen::VectorXd::Zero(p + 1);
    for (int r = 0; r < n; ++r) {
        X.row(r).head(p) = m.features(d, r).transpose();
        X(r, p) = 1.0;
        t(r) = d.missing(r, var) ? 0.0 : 1.0;
    }
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::VectorXd eta = X * m.coef;
        Eigen::VectorXd prob = eta.unaryExpr([](double e) { return sigmoid(e); });
        Eigen::VectorXd w = prob.array() * (1.0 - prob.array()) + 1e-10;
        Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
        H.diagonal().array() += 1e-8;
        Eigen::VectorXd step = H.llt().solve(X.transpose() * (t - prob));
        m.coef += step;
        if (step.lpNorm<Eigen::Infinity>() < 1e-10) break;
    }
    return m;
}

RecoveryWeights recovery_weights(const Dataset& d, const Pattern& g,
                                 const std::vector<int>& targetCols, double clipQuantile) {
    check_pattern_matches(d, g);
    if (!(clipQuantile > 0.0 && clipQuantile <= 1.0))
        throw std::invalid_argument("clip quantile must lie in (0,1]");

    RecoveryWeights rw;
    rw.rows = observed_rows(d, targetCols);
    if (rw.rows.empty()) throw empty_after_deletion();
    const int n = static_cast<int>(rw.rows.size());
    rw.weights = Eigen::VectorXd::Ones(n);

    std::set<int> cols(targetCols.begin(), targetCols.end());
    std::vector<PropensityModel> models;
    for (int c : cols) {
        int r = g.indicator_of(c);
        if (r < 0) continue;
        if (pattern_marks_self_masking(g, c)) continue; // no factor: conditioning on R_S stays
        models.push_back(fit_propensity(d, g, r));
    }
    if (models.empty()) return rw; // all weights exactly one

    rw.anyFactor = true;
    for (int i = 0; i < n; ++i) {
        double w = 1.0;
        for (const auto& m : models) w /= m.prob_observed(d, rw.rows[i]);
        rw.weights(i) = w;
    }
    if (clipQuantile < 1.0) {
        std::vector<double> sorted(rw.weights.data(), rw.weights.data() + n);
        std::size_t k = static_cast<std::size_t>(clipQuantile * (n - 1));
        std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
        double cap = sorted[k];
        rw.weights = rw.weights.cwiseMin(cap);
    }
    rw.normalization = rw.weights.mean();
    rw.weights /= rw.normalization;
    return rw;
}

CITestOutcome corrected_ci_test(const Dataset& d, const Pattern& g, int x, int y,
                                const std::vector<int>& z, const TestConfig& cfg) {
    std::vector<int> cols = {x, y};
    cols.insert(cols.end(), z.begin(), z.end());
    RecoveryWeights rw = recovery_weights(d, g, cols);
    if (!rw.anyFactor) return ci_test(d, x, y, z, nullptr, cfg);
    return ci_test(d, x, y, z, &rw.weights, cfg);
}

CITestOutcome corrected_indicator_ci_test(const Dataset& d, const Pattern& g, int rVar, int v,
                                          const std::vector<int>& z, const TestConfig& cfg) {
    std::vector<int> cols = {v};
    cols.insert(cols.end(), z.begin(), z.end());
    RecoveryWeights rw = recovery_weights(d, g, cols);
    if (!rw.anyFactor) return indicator_ci_test(d, rVar, v, z, cfg, nullptr);
    return indicator_ci_test(d, rVar, v, z, cfg, &rw.weights);
}

} // namespace lcsmd
