#ifndef LCSMD_RECOVERY_HPP
#define LCSMD_RECOVERY_HPP

#include "lcsmd/dataset.hpp"
#include "lcsmd/graph.hpp"
#include "lcsmd/independence.hpp"

#include <Eigen/Dense>

#include <vector>

namespace lcsmd {

// Probabilistic model of P(R_i = 0 | parents of R_i). Features are the
// observed parents' values, the partially observed parents' values (zeroed
// where missing) together with their own indicators, plus squared value
// terms; fit by ridge-regularized logistic regression.
struct PropensityModel {
    int indicatorVar = -1;
    std::vector<int> observedParents;
    std::vector<int> missingParents;
    Eigen::VectorXd coef; // over [features..., intercept]
    Eigen::VectorXd featMean, featStd;
    static constexpr double kClip = 1e-6;

    double prob_observed(const Dataset& d, int row) const;
    Eigen::VectorXd features(const Dataset& d, int row) const;
    int feature_count() const;
};

// The pattern carries the self-masking hypothesis: an indicator whose only
// parent is its own variable is treated as self-masking and must not be
// fitted (its propensity is not estimable).
PropensityModel fit_propensity(const Dataset& d, const Pattern& g, int indicatorNode);

struct RecoveryWeights {
    Eigen::VectorXd weights; // one per retained row, positive, mean 1 after clipping
    double normalization = 1.0; // mean weight before renormalization
    std::vector<int> rows;      // retained row indices
    bool anyFactor = false;     // false when every involved indicator is self-masking or absent
};

// Inverse-propensity weights over the rows retained by test-wise deletion on
// targetCols. Self-masking indicators contribute no factor. Weights are
// clipped at the given upper quantile (1.0 disables clipping) and
// renormalized to mean one.
RecoveryWeights recovery_weights(const Dataset& d, const Pattern& g,
                                 const std::vector<int>& targetCols,
                                 double clipQuantile = 0.99);

// ci_test under the recovered distribution: recovery weights for {x,y} ∪ z,
// then the weighted test. Falls back to the plain test bit-for-bit when no
// indicator contributes a factor.
CITestOutcome corrected_ci_test(const Dataset& d, const Pattern& g, int x, int y,
                                const std::vector<int>& z, const TestConfig& cfg);

// weighted variant of the indicator test, used by the correction stage
CITestOutcome corrected_indicator_ci_test(const Dataset& d, const Pattern& g, int rVar, int v,
                                          const std::vector<int>& z, const TestConfig& cfg);

bool pattern_marks_self_masking(const Pattern& g, int var);

} // namespace lcsmd

#endif
