#ifndef LCSMD_DIRECTION_HPP
#define LCSMD_DIRECTION_HPP

#include "lcsmd/dataset.hpp"
#include "lcsmd/graph.hpp"
#include "lcsmd/independence.hpp"
#include "lcsmd/kernel_ridge.hpp"
#include "lcsmd/skeleton.hpp"

#include <vector>

namespace lcsmd {

struct Regressor {
    std::vector<int> inputs;
    int output = -1;
    KernelRidge model;
    double trainResidualVariance = 0;
};

// kernel ridge fit on the rows where {output} ∪ inputs are observed
Regressor fit_regressor(const Dataset& d, int output, const std::vector<int>& inputs,
                        std::uint64_t seed, const TestConfig& cfg);

// Residual-independence ANM test: regress child on parents on test-wise
// deleted rows, then HSIC between the residual and each parent at a
// Bonferroni-split level. pValue reports the adjusted minimum.
CITestOutcome anm_direction_test(const Dataset& d, int child, const std::vector<int>& parents,
                                 const TestConfig& cfg);

struct InPattern {
    Pattern pattern;
    std::vector<std::pair<int, int>> orientedByAnm;
    std::vector<std::pair<int, int>> orientedByRule;
    std::vector<std::string> notes; // tie and conflict log
};

struct DirectionOptions {
    int maxParents = 4;
};

class AnmEngine {
public:
    virtual ~AnmEngine() = default;
    virtual CITestOutcome direction_test(int child, const std::vector<int>& parents) = 0;
    std::vector<AuditRecord> audit;
};

class StatisticalAnmEngine : public AnmEngine {
public:
    StatisticalAnmEngine(const Dataset& d, const TestConfig& cfg) : data_(d), cfg_(cfg) {}
    CITestOutcome direction_test(int child, const std::vector<int>& parents) override;

private:
    const Dataset& data_;
    TestConfig cfg_;
};

// answers from the generating m-graph: the residual independence holds iff
// the candidate set is the exact parent set and the pair is identifiable
// under the missingness structure
class OracleAnmEngine : public AnmEngine {
public:
    explicit OracleAnmEngine(const MGraph& truth);
    CITestOutcome direction_test(int child, const std::vector<int>& parents) override;

private:
    const MGraph& truth_;
    std::vector<int> vars_;
};

InPattern estimate_in_pattern(AnmEngine& engine, const SkeletonResult& sk, const DirectionOptions& opts);
InPattern apply_orientation_rule(const InPattern& p);
InPattern lcs_md(AnmEngine& engine, const SkeletonResult& sk, const DirectionOptions& opts);
InPattern lcs_md(const Dataset& d, const SkeletonResult& sk, const TestConfig& cfg,
                 const DirectionOptions& opts = {});
InPattern lcs_md_oracle(const MGraph& truth, const SkeletonResult& sk, const DirectionOptions& opts = {});

} // namespace lcsmd

#endif
