#include "lcsmd/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace lcsmd {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// sorted by name pair for byte-stable output
std::vector<std::pair<std::string, std::string>> named_edges(
    const std::vector<Node>& nodes, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::pair<std::string, std::string>> out;
    for (auto [a, b] : edges) out.emplace_back(nodes[a].name, nodes[b].name);
    std::sort(out.begin(), out.end());
    return out;
}

ordered_json nodes_to_json(const std::vector<Node>& nodes) {
    ordered_json arr = ordered_json::array();
    for (const auto& n : nodes) {
        ordered_json jn;
        jn["name"] = n.name;
        jn["kind"] = n.kind == NodeKind::Substantive ? "substantive" : "indicator";
        if (n.kind == NodeKind::Indicator) jn["of"] = nodes[n.of].name;
        arr.push_back(jn);
    }
    return arr;
}

std::vector<Node> nodes_from_json(const ordered_json& arr) {
    std::vector<Node> nodes;
    std::map<std::string, int> index;
    for (const auto& jn : arr) {
        Node n;
        n.name = jn.at("name").get<std::string>();
        std::string kind = jn.at("kind").get<std::string>();
        if (kind == "substantive") n.kind = NodeKind::Substantive;
        else if (kind == "indicator") n.kind = NodeKind::Indicator;
        else throw std::invalid_argument("unknown node kind: " + kind);
        index[n.name] = static_cast<int>(nodes.size());
        nodes.push_back(n);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].kind == NodeKind::Indicator) {
            std::string of = arr[i].at("of").get<std::string>();
            auto it = index.find(of);
            if (it == index.end()) throw std::invalid_argument("indicator references unknown node " + of);
            nodes[i].of = it->second;
        }
    }
    return nodes;
}

std::vector<std::pair<int, int>> edges_from_json(const ordered_json& arr,
                                                 const std::vector<Node>& nodes) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i].name] = static_cast<int>(i);
    std::vector<std::pair<int, int>> out;
    for (const auto& je : arr) {
        std::string a = je.at(0).get<std::string>();
        std::string b = je.at(1).get<std::string>();
        if (!index.count(a) || !index.count(b))
            throw std::invalid_argument("edge references unknown node");
        out.emplace_back(index[a], index[b]);
    }
    return out;
}

ordered_json edge_list_json(const std::vector<Node>& nodes,
                            const std::vector<std::pair<int, int>>& edges) {
    ordered_json arr = ordered_json::array();
    for (const auto& [a, b] : named_edges(nodes, edges)) arr.push_back(ordered_json::array({a, b}));
    return arr;
}

} // namespace

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// ---- CSV ---------------------------------------------------------------------

void write_csv(const std::string& path, const Dataset& d) {
    std::ostringstream os;
    for (int c = 0; c < d.d(); ++c) {
        if (c) os << ',';
        os << d.columns()[c];
    }
    os << '\n';
    for (int r = 0; r < d.n(); ++r) {
        for (int c = 0; c < d.d(); ++c) {
            if (c) os << ',';
            if (d.missing(r, c)) os << "NA";
            else os << fmt17(d.value(r, c));
        }
        os << '\n';
    }
    write_text(path, os.str());
}

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header row");
    std::vector<std::string> columns = split_csv_line(line);
    if (columns.empty() || (columns.size() == 1 && columns[0].empty()))
        throw std::runtime_error(path + ": empty header row");

    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != columns.size())
            throw std::runtime_error(path + ": row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(columns.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& cell = cells[c];
            if (cell.empty() || cell == "NA") {
                values.push_back(0.0);
                mask.push_back(1);
            } else {
                try {
                    std::size_t pos = 0;
                    double v = std::stod(cell, &pos);
                    if (pos != cell.size()) throw std::invalid_argument(cell);
                    values.push_back(v);
                    mask.push_back(0);
                } catch (const std::exception&) {
                    throw std::runtime_error(path + ": row " + std::to_string(row) + ", column " +
                                             columns[c] + ": cannot parse '" + cell + "'");
                }
            }
        }
    }
    if (row == 0) throw std::runtime_error(path + ": no data rows");
    Eigen::MatrixXd m(row, columns.size());
    for (int r = 0; r < row; ++r)
        for (std::size_t c = 0; c < columns.size(); ++c)
            m(r, static_cast<int>(c)) = values[r * columns.size() + c];
    return Dataset(m, mask, columns);
}

// ---- graphs --------------------------------------------------------------------

ordered_json mgraph_to_json(const MGraph& g) {
    ordered_json j;
    j["nodes"] = nodes_to_json(g.nodes());
    j["directed"] = edge_list_json(g.nodes(), g.edges());
    j["undirected"] = ordered_json::array();
    return j;
}

MGraph mgraph_from_json(const ordered_json& j) {
    auto nodes = nodes_from_json(j.at("nodes"));
    auto edges = edges_from_json(j.at("directed"), nodes);
    if (j.contains("undirected") && !j.at("undirected").empty())
        throw std::invalid_argument("an m-graph cannot carry undirected edges");
    return MGraph(nodes, edges);
}

ordered_json pattern_to_json(const Pattern& p) {
    ordered_json j;
    j["nodes"] = nodes_to_json(p.nodes());
    j["directed"] = edge_list_json(p.nodes(), p.directed_edges());
    std::vector<std::pair<int, int>> und;
    for (auto [a, b] : p.undirected_edges()) {
        if (p.node(a).name <= p.node(b).name) und.emplace_back(a, b);
        else und.emplace_back(b, a);
    }
    j["undirected"] = edge_list_json(p.nodes(), und);
    return j;
}

Pattern pattern_from_json(const ordered_json& j) {
    auto nodes = nodes_from_json(j.at("nodes"));
    auto directed = edges_from_json(j.at("directed"), nodes);
    auto undirected = edges_from_json(j.at("undirected"), nodes);
    return Pattern(nodes, directed, undirected);
}

namespace {

std::string dot_of(const std::vector<Node>& nodes,
                   const std::vector<std::pair<int, int>>& directed,
                   const std::vector<std::pair<int, int>>& undirected,
                   const std::map<std::pair<int, int>, std::string>& attr) {
    std::ostringstream os;
    os << "digraph g {\n";
    for (const auto& n : nodes) {
        os << "  \"" << n.name << "\"";
        if (n.kind == NodeKind::Indicator) os << " [shape=box]";
        os << ";\n";
    }
    struct Line { std::string a, b; std::string extra; bool undirected; };
    std::vector<Line> lines;
    for (auto [a, b] : directed) {
        std::string extra;
        if (auto it = attr.find({a, b}); it != attr.end()) extra = it->second;
        lines.push_back({nodes[a].name, nodes[b].name, extra, false});
    }
    for (auto [a, b] : undirected) {
        int lo = nodes[a].name <= nodes[b].name ? a : b;
        int hi = lo == a ? b : a;
        std::string extra;
        if (auto it = attr.find({a, b}); it != attr.end()) extra = it->second;
        lines.push_back({nodes[lo].name, nodes[hi].name, extra, true});
    }
    std::sort(lines.begin(), lines.end(), [](const Line& x, const Line& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    for (const auto& l : lines) {
        os << "  \"" << l.a << "\" -> \"" << l.b << "\"";
        std::string attrs;
        if (l.undirected) attrs = "dir=none";
        if (!l.extra.empty()) attrs += (attrs.empty() ? "" : ", ") + l.extra;
        if (!attrs.empty()) os << " [" << attrs << "]";
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace

std::string pattern_to_dot(const Pattern& p) {
    return dot_of(p.nodes(), p.directed_edges(), p.undirected_edges(), {});
}

std::string mgraph_to_dot(const MGraph& g) {
    return dot_of(g.nodes(), g.edges(), {}, {});
}

std::string in_pattern_to_dot(const InPattern& p) {
    std::map<std::pair<int, int>, std::string> attr;
    for (auto [a, b] : p.orientedByAnm) attr[{a, b}] = "provenance=anm";
    for (auto [a, b] : p.orientedByRule) attr[{a, b}] = "provenance=rule";
    for (auto [a, b] : p.pattern.undirected_edges()) attr[{a, b}] = "provenance=undirected";
    return dot_of(p.pattern.nodes(), p.pattern.directed_edges(), p.pattern.undirected_edges(), attr);
}

ordered_json skeleton_result_to_json(const SkeletonResult& r) {
    ordered_json j;
    j["pattern"] = pattern_to_json(r.pattern);
    ordered_json flags = ordered_json::array();
    std::vector<std::string> names;
    for (int idx : r.selfMaskingIndicators) names.push_back(r.pattern.node(idx).name);
    std::sort(names.begin(), names.end());
    for (const auto& n : names) flags.push_back(n);
    j["selfMasking"] = flags;
    names.clear();
    for (int idx : r.undeterminedIndicators) names.push_back(r.pattern.node(idx).name);
    std::sort(names.begin(), names.end());
    ordered_json und = ordered_json::array();
    for (const auto& n : names) und.push_back(n);
    j["undetermined"] = und;
    ordered_json seps = ordered_json::array();
    for (const auto& [pair, S] : r.sepsets) {
        ordered_json e;
        e["pair"] = ordered_json::array(
            {r.pattern.node(pair.first).name, r.pattern.node(pair.second).name});
        ordered_json names_ = ordered_json::array();
        for (int c : S) names_.push_back(r.pattern.node(c).name);
        e["set"] = names_;
        seps.push_back(e);
    }
    j["sepsets"] = seps;
    j["converged"] = r.converged;
    return j;
}

ordered_json in_pattern_to_json(const InPattern& p) {
    ordered_json j;
    j["pattern"] = pattern_to_json(p.pattern);
    auto edges_json = [&](const std::vector<std::pair<int, int>>& es) {
        return edge_list_json(p.pattern.nodes(), es);
    };
    j["orientedByAnm"] = edges_json(p.orientedByAnm);
    j["orientedByRule"] = edges_json(p.orientedByRule);
    ordered_json notes = ordered_json::array();
    for (const auto& n : p.notes) notes.push_back(n);
    j["notes"] = notes;
    return j;
}

InPattern in_pattern_from_json(const ordered_json& j) {
    InPattern p{pattern_from_json(j.at("pattern")), {}, {}, {}};
    p.orientedByAnm = edges_from_json(j.at("orientedByAnm"), p.pattern.nodes());
    p.orientedByRule = edges_from_json(j.at("orientedByRule"), p.pattern.nodes());
    if (j.contains("notes"))
        for (const auto& n : j.at("notes")) p.notes.push_back(n.get<std::string>());
    return p;
}

ordered_json audit_record_to_json(const AuditRecord& r) {
    ordered_json j;
    j["stage"] = r.stage;
    j["x"] = r.x;
    j["y"] = r.y;
    ordered_json z = ordered_json::array();
    for (const auto& c : r.z) z.push_back(c);
    j["z"] = z;
    j["corrected"] = r.corrected;
    j["weightsUsed"] = r.outcome.weightsUsed;
    j["statistic"] = r.outcome.statistic;
    j["pValue"] = r.outcome.pValue;
    j["independent"] = r.outcome.independent;
    j["effectiveN"] = r.outcome.effectiveN;
    return j;
}

void write_audit_log(const std::string& path, const std::vector<AuditRecord>& records) {
    std::ostringstream os;
    for (const auto& r : records) os << audit_record_to_json(r).dump() << '\n';
    write_text(path, os.str());
}

// ---- generator specs ------------------------------------------------------------

namespace {

ordered_json vector_json(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const ordered_json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<int>(i)) = arr[i].get<double>();
    return v;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
    ordered_json arr = ordered_json::array();
    for (int r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        arr.push_back(row);
    }
    return arr;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& arr) {
    const int rows = static_cast<int>(arr.size());
    const int cols = rows > 0 ? static_cast<int>(arr[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = arr[r][c].get<double>();
    return m;
}

std::string noise_name(NoiseLaw law) {
    switch (law) {
        case NoiseLaw::Uniform: return "uniform";
        case NoiseLaw::Gaussian: return "gaussian";
        case NoiseLaw::Laplace: return "laplace";
    }
    return "uniform";
}

NoiseLaw noise_from_name(const std::string& s) {
    if (s == "uniform") return NoiseLaw::Uniform;
    if (s == "gaussian") return NoiseLaw::Gaussian;
    if (s == "laplace") return NoiseLaw::Laplace;
    throw std::invalid_argument("unknown noise law: " + s);
}

} // namespace

ordered_json spec_to_json(const ScmSpec& spec) {
    ordered_json j;
    j["nVars"] = spec.nVars;
    j["seed"] = spec.seed;
    j["noiseScale"] = spec.noiseScale;
    j["structuralConditionVerified"] = spec.structuralConditionVerified;
    ordered_json edges = ordered_json::array();
    for (auto [a, b] : spec.edges) edges.push_back(ordered_json::array({a, b}));
    j["edges"] = edges;
    ordered_json noise = ordered_json::array();
    for (auto lw : spec.noise) noise.push_back(noise_name(lw));
    j["noise"] = noise;

    ordered_json mechs = ordered_json::array();
    for (const auto& m : spec.mechanisms) {
        ordered_json jm;
        if (std::holds_alternative<std::monostate>(m)) {
            jm["type"] = "root";
        } else if (const auto* mlp = std::get_if<MlpMechanism>(&m)) {
            jm["type"] = "mlp";
            jm["w1"] = matrix_json(mlp->w1);
            jm["b1"] = vector_json(mlp->b1);
            jm["w2"] = vector_json(mlp->w2);
        } else {
            jm["type"] = "linear";
            jm["coef"] = vector_json(std::get<LinearMechanism>(m).coef);
        }
        mechs.push_back(jm);
    }
    j["mechanisms"] = mechs;

    ordered_json miss = ordered_json::array();
    for (const auto& [v, ms] : spec.missingness) {
        ordered_json jm;
        jm["var"] = v;
        if (const auto* sm = std::get_if<SelfMaskingSpec>(&ms)) {
            jm["type"] = "self-masking";
            jm["slope"] = sm->slope;
            jm["hardThreshold"] = sm->hardThreshold;
            jm["targetRate"] = sm->targetRate;
            jm["resolved"] = sm->resolved;
            if (sm->resolved) {
                jm["mean"] = sm->mean;
                jm["sd"] = sm->sd;
                jm["intercept"] = sm->intercept;
                jm["threshold"] = sm->threshold;
            }
        } else if (const auto* pd = std::get_if<ParentDrivenSpec>(&ms)) {
            jm["type"] = "parent-driven";
            ordered_json ps = ordered_json::array();
            for (int p : pd->parents) ps.push_back(p);
            jm["parents"] = ps;
            jm["slopes"] = vector_json(pd->slopes);
            jm["targetRate"] = pd->targetRate;
            jm["resolved"] = pd->resolved;
            if (pd->resolved) {
                jm["mean"] = vector_json(pd->mean);
                jm["sd"] = vector_json(pd->sd);
                jm["intercept"] = pd->intercept;
            }
        } else {
            jm["type"] = "mcar";
            jm["rate"] = std::get<McarSpec>(ms).rate;
        }
        miss.push_back(jm);
    }
    j["missingness"] = miss;
    return j;
}

ScmSpec spec_from_json(const ordered_json& j) {
    ScmSpec spec;
    spec.nVars = j.at("nVars").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.noiseScale = j.at("noiseScale").get<double>();
    spec.structuralConditionVerified = j.at("structuralConditionVerified").get<bool>();
    for (const auto& e : j.at("edges"))
        spec.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    for (const auto& n : j.at("noise")) spec.noise.push_back(noise_from_name(n.get<std::string>()));

    for (const auto& jm : j.at("mechanisms")) {
        std::string type = jm.at("type").get<std::string>();
        if (type == "root") {
            spec.mechanisms.emplace_back(std::monostate{});
        } else if (type == "mlp") {
            MlpMechanism mlp;
            mlp.w1 = matrix_from_json(jm.at("w1"));
            mlp.b1 = vector_from_json(jm.at("b1"));
            mlp.w2 = vector_from_json(jm.at("w2"));
            spec.mechanisms.emplace_back(mlp);
        } else if (type == "linear") {
            spec.mechanisms.emplace_back(LinearMechanism{vector_from_json(jm.at("coef"))});
        } else {
            throw std::invalid_argument("unknown mechanism type: " + type);
        }
    }

    for (const auto& jm : j.at("missingness")) {
        int v = jm.at("var").get<int>();
        std::string type = jm.at("type").get<std::string>();
        if (type == "self-masking") {
            SelfMaskingSpec sm;
            sm.slope = jm.at("slope").get<double>();
            sm.hardThreshold = jm.at("hardThreshold").get<bool>();
            sm.targetRate = jm.at("targetRate").get<double>();
            sm.resolved = jm.at("resolved").get<bool>();
            if (sm.resolved) {
                sm.mean = jm.at("mean").get<double>();
                sm.sd = jm.at("sd").get<double>();
                sm.intercept = jm.at("intercept").get<double>();
                sm.threshold = jm.at("threshold").get<double>();
            }
            spec.missingness[v] = sm;
        } else if (type == "parent-driven") {
            ParentDrivenSpec pd;
            for (const auto& p : jm.at("parents")) pd.parents.push_back(p.get<int>());
            pd.slopes = vector_from_json(jm.at("slopes"));
            pd.targetRate = jm.at("targetRate").get<double>();
            pd.resolved = jm.at("resolved").get<bool>();
            if (pd.resolved) {
                pd.mean = vector_from_json(jm.at("mean"));
                pd.sd = vector_from_json(jm.at("sd"));
                pd.intercept = jm.at("intercept").get<double>();
            }
            spec.missingness[v] = pd;
        } else if (type == "mcar") {
            spec.missingness[v] = McarSpec{jm.at("rate").get<double>()};
        } else {
            throw std::invalid_argument("unknown missingness type: " + type);
        }
    }
    return spec;
}

ordered_json ground_truth_to_json(const ScmSpec& spec) {
    ordered_json j;
    j["graph"] = mgraph_to_json(spec.to_mgraph());
    auto nm = spec.names();
    ordered_json flags = ordered_json::array();
    for (int v : spec.self_masking_vars()) flags.push_back("R_" + nm[v]);
    j["selfMasking"] = flags;
    ordered_json miss;
    for (const auto& [v, ms] : spec.missingness) {
        if (std::holds_alternative<SelfMaskingSpec>(ms)) miss[nm[v]] = "self-masking";
        else if (std::holds_alternative<ParentDrivenSpec>(ms)) miss[nm[v]] = "parent-driven";
        else miss[nm[v]] = "mcar";
    }
    j["missingness"] = miss;
    ordered_json mechs;
    for (int i = 0; i < spec.nVars; ++i) {
        const auto& m = spec.mechanisms[i];
        if (std::holds_alternative<std::monostate>(m)) mechs[nm[i]] = "root";
        else if (std::holds_alternative<MlpMechanism>(m)) mechs[nm[i]] = "mlp";
        else mechs[nm[i]] = "linear";
    }
    j["mechanisms"] = mechs;
    return j;
}

// ---- evaluation -------------------------------------------------------------------

ordered_json eval_report_to_json(const EvalReport& r) {
    ordered_json j;
    j["skeleton"] = {{"precision", r.skeleton.precision},
                     {"recall", r.skeleton.recall},
                     {"f1", r.skeleton.f1},
                     {"shd", r.skeleton.shd},
                     {"vacuous", r.skeleton.vacuous}};
    j["orientation"] = {{"precision", r.orientation.precision},
                        {"recall", r.orientation.recall},
                        {"f1", r.orientation.f1},
                        {"shd", r.orientation.shd},
                        {"vacuous", r.orientation.vacuous}};
    j["indicator"] = {{"parentSetAccuracy", r.indicator.parentSetAccuracy},
                      {"selfMaskingAccuracy", r.indicator.selfMaskingAccuracy},
                      {"vacuous", r.indicator.vacuous}};
    j["meta"] = {{"seed", r.seed}, {"n", r.n}, {"configHash", r.configHash}};
    return j;
}

std::string eval_report_csv_header() {
    return "seed,n,skeleton_precision,skeleton_recall,skeleton_f1,skeleton_shd,"
           "orientation_precision,orientation_recall,orientation_f1,orientation_shd,"
           "indicator_parent_accuracy,indicator_selfmasking_accuracy";
}

std::string eval_report_csv_row(const EvalReport& r) {
    std::ostringstream os;
    os << r.seed << ',' << r.n << ',' << fmt17(r.skeleton.precision) << ','
       << fmt17(r.skeleton.recall) << ',' << fmt17(r.skeleton.f1) << ',' << r.skeleton.shd << ','
       << fmt17(r.orientation.precision) << ',' << fmt17(r.orientation.recall) << ','
       << fmt17(r.orientation.f1) << ',' << r.orientation.shd << ','
       << fmt17(r.indicator.parentSetAccuracy) << ',' << fmt17(r.indicator.selfMaskingAccuracy);
    return os.str();
}

// ---- run configuration ---------------------------------------------------------------

TestConfig RunConfig::test_config() const {
    TestConfig cfg;
    cfg.alpha = alpha;
    cfg.bandwidth = bandwidth == "fixed" ? BandwidthRule::Fixed : BandwidthRule::MedianHeuristic;
    cfg.fixedBandwidth = fixedBandwidth;
    cfg.pValueMethod = pValueMethod == "permutation" ? PValueMethod::Permutation : PValueMethod::GammaApprox;
    cfg.permutationCount = permutations;
    cfg.minEffectiveN = minEffectiveN;
    cfg.maxKernelSamples = maxKernelSamples;
    cfg.ciMethod = ciMethod == "fisher-z" ? CiMethod::FisherZ : CiMethod::ResidualHsic;
    cfg.seed = seed;
    return cfg;
}

SkeletonOptions RunConfig::skeleton_options() const {
    SkeletonOptions o;
    o.maxCond = maxCond;
    o.correctionSweeps = correctionSweeps;
    return o;
}

DirectionOptions RunConfig::direction_options() const {
    DirectionOptions o;
    o.maxParents = maxParents;
    return o;
}

void RunConfig::validate() const {
    test_config().validate();
    if (bandwidth != "median" && bandwidth != "fixed")
        throw std::invalid_argument("bandwidth must be 'median' or 'fixed'");
    if (pValueMethod != "gamma" && pValueMethod != "permutation")
        throw std::invalid_argument("pValueMethod must be 'gamma' or 'permutation'");
    if (ciMethod != "residual-hsic" && ciMethod != "fisher-z")
        throw std::invalid_argument("ciMethod must be 'residual-hsic' or 'fisher-z'");
    if (mode != "statistical" && mode != "oracle")
        throw std::invalid_argument("mode must be 'statistical' or 'oracle'");
    if (maxCond < 0 || maxParents < 1 || correctionSweeps < 1)
        throw std::invalid_argument("bad search bounds");
}

RunConfig run_config_from_json(const ordered_json& j) {
    static const std::set<std::string> known = {
        "seed", "alpha", "bandwidth", "fixedBandwidth", "pValueMethod", "permutations",
        "minEffectiveN", "maxKernelSamples", "ciMethod", "maxCond", "maxParents",
        "correctionSweeps", "mode"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("unknown config key: " + it.key());
    RunConfig c;
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("bandwidth")) c.bandwidth = j.at("bandwidth").get<std::string>();
    if (j.contains("fixedBandwidth")) c.fixedBandwidth = j.at("fixedBandwidth").get<double>();
    if (j.contains("pValueMethod")) c.pValueMethod = j.at("pValueMethod").get<std::string>();
    if (j.contains("permutations")) c.permutations = j.at("permutations").get<int>();
    if (j.contains("minEffectiveN")) c.minEffectiveN = j.at("minEffectiveN").get<int>();
    if (j.contains("maxKernelSamples")) c.maxKernelSamples = j.at("maxKernelSamples").get<int>();
    if (j.contains("ciMethod")) c.ciMethod = j.at("ciMethod").get<std::string>();
    if (j.contains("maxCond")) c.maxCond = j.at("maxCond").get<int>();
    if (j.contains("maxParents")) c.maxParents = j.at("maxParents").get<int>();
    if (j.contains("correctionSweeps")) c.correctionSweeps = j.at("correctionSweeps").get<int>();
    if (j.contains("mode")) c.mode = j.at("mode").get<std::string>();
    c.validate();
    return c;
}

ordered_json run_config_to_json(const RunConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["alpha"] = c.alpha;
    j["bandwidth"] = c.bandwidth;
    j["fixedBandwidth"] = c.fixedBandwidth;
    j["pValueMethod"] = c.pValueMethod;
    j["permutations"] = c.permutations;
    j["minEffectiveN"] = c.minEffectiveN;
    j["maxKernelSamples"] = c.maxKernelSamples;
    j["ciMethod"] = c.ciMethod;
    j["maxCond"] = c.maxCond;
    j["maxParents"] = c.maxParents;
    j["correctionSweeps"] = c.correctionSweeps;
    j["mode"] = c.mode;
    return j;
}

} // namespace lcsmd
