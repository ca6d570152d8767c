#ifndef LCSMD_SKELETON_HPP
#define LCSMD_SKELETON_HPP

#include "lcsmd/dataset.hpp"
#include "lcsmd/graph.hpp"
#include "lcsmd/independence.hpp"
#include "lcsmd/recovery.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace lcsmd {

struct AuditRecord {
    std::string stage;
    std::string x, y;
    std::vector<std::string> z;
    bool corrected = false;
    CITestOutcome outcome;
};

// CI answers for the skeleton search. The statistical engine runs test-wise
// deleted (and recovery-weighted) kernel tests on a dataset; the oracle
// engine answers d-separation queries on a known m-graph, with deletion
// realized as conditioning on the involved missingness indicators.
class CiEngine {
public:
    virtual ~CiEngine() = default;
    virtual int num_vars() const = 0;
    virtual std::string var_name(int v) const = 0;
    virtual std::vector<int> partially_observed_vars() const = 0;

    virtual CITestOutcome ci(int x, int y, const std::vector<int>& z) = 0;
    virtual CITestOutcome ci_corrected(int x, int y, const std::vector<int>& z, const Pattern& hyp) = 0;
    virtual CITestOutcome indicator_ci(int rVar, int v, const std::vector<int>& z) = 0;
    virtual CITestOutcome indicator_ci_corrected(int rVar, int v, const std::vector<int>& z,
                                                 const Pattern& hyp) = 0;

    std::vector<AuditRecord> audit;

protected:
    void log(const std::string& stage, const std::string& x, const std::string& y,
             const std::vector<std::string>& z, bool corrected, const CITestOutcome& o);
};

class StatisticalCiEngine : public CiEngine {
public:
    StatisticalCiEngine(const Dataset& d, const TestConfig& cfg);

    int num_vars() const override { return data_.d(); }
    std::string var_name(int v) const override { return data_.columns().at(v); }
    std::vector<int> partially_observed_vars() const override;

    CITestOutcome ci(int x, int y, const std::vector<int>& z) override;
    CITestOutcome ci_corrected(int x, int y, const std::vector<int>& z, const Pattern& hyp) override;
    CITestOutcome indicator_ci(int rVar, int v, const std::vector<int>& z) override;
    CITestOutcome indicator_ci_corrected(int rVar, int v, const std::vector<int>& z,
                                         const Pattern& hyp) override;

    const Dataset& data() const { return data_; }
    const TestConfig& config() const { return cfg_; }

private:
    const Dataset& data_;
    TestConfig cfg_;
    std::map<std::string, CITestOutcome> cache_;
    std::uint64_t hypothesis_key(const std::vector<int>& cols, const Pattern& hyp) const;
};

class OracleCiEngine : public CiEngine {
public:
    explicit OracleCiEngine(const MGraph& truth);

    int num_vars() const override { return static_cast<int>(vars_.size()); }
    std::string var_name(int v) const override { return truth_.node(vars_.at(v)).name; }
    std::vector<int> partially_observed_vars() const override;

    CITestOutcome ci(int x, int y, const std::vector<int>& z) override;
    CITestOutcome ci_corrected(int x, int y, const std::vector<int>& z, const Pattern& hyp) override;
    CITestOutcome indicator_ci(int rVar, int v, const std::vector<int>& z) override;
    CITestOutcome indicator_ci_corrected(int rVar, int v, const std::vector<int>& z,
                                         const Pattern& hyp) override;

    const MGraph& truth() const { return truth_; }

private:
    const MGraph& truth_;
    std::vector<int> vars_; // engine variable -> truth node index
    CITestOutcome query(int x, int y, const std::vector<int>& z, const std::vector<int>& extra);
};

using SepSetTable = std::map<std::pair<int, int>, std::vector<int>>;

struct SkeletonOptions {
    int maxCond = 3;
    int correctionSweeps = 10;
};

struct SkeletonResult {
    Pattern pattern;
    SepSetTable sepsets;
    std::vector<int> selfMaskingIndicators; // indicator node ids in pattern
    std::vector<int> undeterminedIndicators;
    bool converged = true;
    std::vector<AuditRecord> audit;
};

// node table shared by all stages: substantive variables first, indicators
// appended for the partially observed ones
std::vector<Node> skeleton_nodes(const CiEngine& engine);

// PC edge removal over substantive variables on test-wise deleted data
std::pair<Pattern, SepSetTable> pc_skeleton_deleted(CiEngine& engine, const SkeletonOptions& opts);

// attach indicator parents: keep V_j -> R_i unless some conditioning subset
// of Adj(V_j) separates them (V_i itself is never conditioned on)
Pattern detect_indicator_parents(CiEngine& engine, const Pattern& p, const SkeletonOptions& opts);

// flag weak self-masking indicators; flagged indicators lose all detected
// parents and gain the single edge V_k -> R_{V_k}
std::pair<std::vector<int>, Pattern> detect_self_masking(CiEngine& engine, const Pattern& p,
                                                         const SepSetTable& sepsets,
                                                         const SkeletonOptions& opts);

// iterative corrected re-testing of substantive and indicator edges until a
// sweep makes no update (capped at opts.correctionSweeps)
SkeletonResult correct_extraneous_edges(CiEngine& engine, const Pattern& p, const SepSetTable& sepsets,
                                        const SkeletonOptions& opts);

SkeletonResult sm_mvpc(CiEngine& engine, const SkeletonOptions& opts);
SkeletonResult sm_mvpc(const Dataset& d, const TestConfig& cfg, const SkeletonOptions& opts = {});
SkeletonResult sm_mvpc_oracle(const MGraph& truth, const SkeletonOptions& opts);

// plain test-wise-deletion PC, kept as the comparison baseline
SkeletonResult tdpc_baseline(CiEngine& engine, const SkeletonOptions& opts);
SkeletonResult tdpc_baseline(const Dataset& d, const TestConfig& cfg, const SkeletonOptions& opts = {});

} // namespace lcsmd

#endif
