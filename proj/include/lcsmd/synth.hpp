#ifndef LCSMD_SYNTH_HPP
#define LCSMD_SYNTH_HPP

#include "lcsmd/dataset.hpp"
#include "lcsmd/graph.hpp"

#include <Eigen/Dense>

#include <map>
#include <stdexcept>
#include <variant>
#include <vector>

namespace lcsmd {

class structural_condition_unsatisfiable : public std::runtime_error {
public:
    explicit structural_condition_unsatisfiable(const std::string& what) : std::runtime_error(what) {}
};

// two-layer random MLP: f(x) = w2 . tanh(W1 x + b1)
struct MlpMechanism {
    Eigen::MatrixXd w1; // hidden x inputs, columns normalized
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
};

struct LinearMechanism {
    Eigen::VectorXd coef;
};

using Mechanism = std::variant<std::monostate, MlpMechanism, LinearMechanism>;

enum class NoiseLaw { Uniform, Gaussian, Laplace };

// missingness driven by the variable's own value through a logistic (or a
// hard upper threshold); calibration against the target rate happens at
// sampling time on a fixed prefix of rows
struct SelfMaskingSpec {
    double slope = 3.0;
    bool hardThreshold = false;
    double targetRate = 0.2;
    // resolved during sampling
    bool resolved = false;
    double mean = 0, sd = 1, intercept = 0, threshold = 0;
};

struct ParentDrivenSpec {
    std::vector<int> parents;
    Eigen::VectorXd slopes;
    double targetRate = 0.2;
    bool resolved = false;
    Eigen::VectorXd mean, sd;
    double intercept = 0;
};

struct McarSpec {
    double rate = 0.2;
};

using MissingnessSpec = std::variant<SelfMaskingSpec, ParentDrivenSpec, McarSpec>;

struct ScmSpec {
    int nVars = 0;
    std::vector<std::pair<int, int>> edges; // substantive DAG; node index order is topological
    std::vector<Mechanism> mechanisms;      // per node; monostate for roots
    std::vector<NoiseLaw> noise;
    double noiseScale = 1.0;
    std::map<int, MissingnessSpec> missingness; // variable -> mechanism
    std::uint64_t seed = 0;
    bool structuralConditionVerified = false;

    std::vector<std::string> names() const;
    // substantive nodes first, indicators appended in ascending variable order
    MGraph to_mgraph() const;
    std::vector<int> self_masking_vars() const;
};

struct GeneratedBatch {
    Dataset dataset;
    Eigen::MatrixXd completeValues;
    ScmSpec spec; // with resolved missingness parameters
    std::vector<std::string> warnings;
};

struct SpecOptions {
    double expectedDegree = 2.0;
    double targetMissingRate = 0.2;
    int mlpHidden = 50;
    bool linearMechanisms = false;
    bool hardThresholdSelfMasking = false;
    NoiseLaw noise = NoiseLaw::Uniform;
    int parentDrivenParents = 2;
    int structuralMaxCond = 3;
    int rejectionBudget = 1000;
};

// Random DAG + mechanisms + missingness; re-samples until every self-masking
// variable is detectable through the structural condition (checked by running
// the oracle-mode identification stages on the implied m-graph).
ScmSpec random_spec(int nVars, int nMissingVars, int nSelfMasking, std::uint64_t seed,
                    const SpecOptions& opts = {});

// Specs sharing one DAG, one mechanism draw, and one parent-driven
// missingness layer across a grid of self-masking counts; self-masking
// variables nest as the count grows. Used by sweeps so that grid cells are
// coupled through common random numbers.
std::vector<ScmSpec> nested_sweep_specs(int nVars, int nParentDriven,
                                        const std::vector<int>& selfMaskingGrid,
                                        std::uint64_t seed, const SpecOptions& opts = {});

GeneratedBatch sample(const ScmSpec& spec, int n);

// mechanism value for one node given its parents' values (noise excluded)
double mechanism_value(const ScmSpec& spec, int node, const Eigen::VectorXd& parentValues);

// exact noise draws implied by the batch: value - f(parents), per node
Eigen::MatrixXd noise_values(const GeneratedBatch& batch);

// the structural-condition check used by random_spec, exposed for tests and
// for filtering sampled graphs
bool structural_condition_holds(const MGraph& truth, int maxCond);

} // namespace lcsmd

#endif
