#ifndef LCSMD_INDEPENDENCE_HPP
#define LCSMD_INDEPENDENCE_HPP

#include "lcsmd/dataset.hpp"
#include "lcsmd/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace lcsmd {

enum class BandwidthRule { MedianHeuristic, Fixed };
enum class PValueMethod { GammaApprox, Permutation };
enum class CiMethod { ResidualHsic, FisherZ };

struct TestConfig {
    double alpha = 0.01;
    BandwidthRule bandwidth = BandwidthRule::MedianHeuristic;
    double fixedBandwidth = 1.0;
    PValueMethod pValueMethod = PValueMethod::GammaApprox;
    int permutationCount = 1000;
    int minEffectiveN = 30;
    // rows entering kernel statistics are capped at this size (evenly spaced
    // subsample); keeps test cost bounded on large deleted samples
    int maxKernelSamples = 500;
    CiMethod ciMethod = CiMethod::ResidualHsic;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CITestOutcome {
    double statistic = 0.0;
    double pValue = 1.0;
    bool independent = true;
    int effectiveN = 0;
    bool weightsUsed = false;
};

// Biased HSIC with Gaussian kernels; optionally sample-weighted (weights are
// normalized internally; equal weights reproduce the unweighted statistic
// bit-for-bit). p-value by gamma approximation or permutation.
CITestOutcome hsic_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd* weights, const TestConfig& cfg);

// HSIC on caller-supplied kernel matrices (used for the delta kernel on
// binary indicators).
CITestOutcome hsic_from_kernels(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L,
                                const Eigen::VectorXd* weights, const TestConfig& cfg);

// Test-wise-deleted CI test between columns x and y given z. Marginal tests
// run HSIC directly; conditional tests regress both sides on z (kernel ridge)
// and test the residual pair. Weights, when given, are indexed by the rows
// retained after deletion on {x,y} ∪ z.
CITestOutcome ci_test(const Dataset& d, int x, int y, const std::vector<int>& z,
                      const Eigen::VectorXd* weights, const TestConfig& cfg);

// CI test between the missingness indicator of rVar and column v given z,
// on rows where {v} ∪ z are observed. Uses a delta kernel on the indicator.
// Weights, when given, are indexed by the retained rows.
CITestOutcome indicator_ci_test(const Dataset& d, int rVar, int v, const std::vector<int>& z,
                                const TestConfig& cfg, const Eigen::VectorXd* weights = nullptr);

// Answers via d-separation on g; lets the learning algorithms run in oracle
// mode for exactness tests.
CITestOutcome oracle_ci_test(const MGraph& g, int x, int y, const std::vector<int>& z);

// deterministic permutation seed for a test on (x, y | z)
std::uint64_t ci_test_seed(std::uint64_t base, int x, int y, const std::vector<int>& z);

Eigen::MatrixXd gaussian_kernel_matrix(const Eigen::VectorXd& x, const TestConfig& cfg);
Eigen::MatrixXd delta_kernel_matrix(const Eigen::VectorXd& x);

std::vector<int> evenly_spaced_subsample(int n, int cap);

} // namespace lcsmd

#endif
