#ifndef LCSMD_IO_HPP
#define LCSMD_IO_HPP

#include "lcsmd/dataset.hpp"
#include "lcsmd/direction.hpp"
#include "lcsmd/graph.hpp"
#include "lcsmd/metrics.hpp"
#include "lcsmd/skeleton.hpp"
#include "lcsmd/synth.hpp"

#include <json.hpp>

#include <string>

namespace lcsmd {

using ordered_json = nlohmann::ordered_json;

// ---- CSV: header row, 17 significant digits, NA for missing ----------------
void write_csv(const std::string& path, const Dataset& d);
Dataset read_csv(const std::string& path);

// ---- graphs -----------------------------------------------------------------
// schema: {nodes:[{name,kind,of?}], directed:[[a,b]], undirected:[[a,b]]}
// nodes ordered by index, edges lexicographic by name pair
ordered_json mgraph_to_json(const MGraph& g);
MGraph mgraph_from_json(const ordered_json& j);
ordered_json pattern_to_json(const Pattern& p);
Pattern pattern_from_json(const ordered_json& j);

std::string pattern_to_dot(const Pattern& p);
std::string mgraph_to_dot(const MGraph& g);
// provenance-aware variant for learned directions (anm | rule | undirected)
std::string in_pattern_to_dot(const InPattern& p);

ordered_json skeleton_result_to_json(const SkeletonResult& r);
ordered_json in_pattern_to_json(const InPattern& p);
InPattern in_pattern_from_json(const ordered_json& j);

ordered_json audit_record_to_json(const AuditRecord& r);
void write_audit_log(const std::string& path, const std::vector<AuditRecord>& records);

// ---- generator specs ---------------------------------------------------------
ordered_json spec_to_json(const ScmSpec& spec);
ScmSpec spec_from_json(const ordered_json& j);
ordered_json ground_truth_to_json(const ScmSpec& spec);

// ---- evaluation ---------------------------------------------------------------
ordered_json eval_report_to_json(const EvalReport& r);
std::string eval_report_csv_header();
std::string eval_report_csv_row(const EvalReport& r);

// ---- run configuration --------------------------------------------------------
struct RunConfig {
    std::uint64_t seed = 1;
    double alpha = 0.01;
    std::string bandwidth = "median";
    double fixedBandwidth = 1.0;
    std::string pValueMethod = "gamma";
    int permutations = 1000;
    int minEffectiveN = 30;
    int maxKernelSamples = 500;
    std::string ciMethod = "residual-hsic";
    int maxCond = 3;
    int maxParents = 4;
    int correctionSweeps = 10;
    std::string mode = "statistical";

    TestConfig test_config() const;
    SkeletonOptions skeleton_options() const;
    DirectionOptions direction_options() const;
    void validate() const;
};

// rejects unknown keys
RunConfig run_config_from_json(const ordered_json& j);
ordered_json run_config_to_json(const RunConfig& c);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

} // namespace lcsmd

#endif
