// Command-line front end: generate | discover | eval | sweep
//
// exit codes: 0 success, 2 argument/validation error, 1 runtime error

#include "lcsmd/direction.hpp"
#include "lcsmd/io.hpp"
#include "lcsmd/metrics.hpp"
#include "lcsmd/rng.hpp"
#include "lcsmd/skeleton.hpp"
#include "lcsmd/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <future>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace lcsmd;

namespace {

struct GenerateArgs {
    int vars = 10;
    int missing = 3;
    int selfMasking = 3;
    int n = 7000;
    std::uint64_t seed = 1;
    double edgeDegree = 2.0;
    double rate = 0.2;
    std::string mechanism = "mlp";
    std::string noise = "uniform";
    std::string mask = "logistic";
    int pdParents = 2;
    std::string out;
};

SpecOptions spec_options(const GenerateArgs& a) {
    SpecOptions o;
    o.expectedDegree = a.edgeDegree;
    o.targetMissingRate = a.rate;
    o.linearMechanisms = a.mechanism == "linear";
    o.hardThresholdSelfMasking = a.mask == "threshold";
    if (a.noise == "gaussian") o.noise = NoiseLaw::Gaussian;
    else if (a.noise == "laplace") o.noise = NoiseLaw::Laplace;
    else o.noise = NoiseLaw::Uniform;
    o.parentDrivenParents = a.pdParents;
    return o;
}

int cmd_generate(const GenerateArgs& a) {
    ScmSpec spec = random_spec(a.vars, a.missing, a.selfMasking, a.seed, spec_options(a));
    GeneratedBatch batch = sample(spec, a.n);
    fs::create_directories(a.out);
    write_csv((fs::path(a.out) / "data.csv").string(), batch.dataset);
    write_text((fs::path(a.out) / "truth.json").string(), ground_truth_to_json(batch.spec).dump(2) + "\n");
    write_text((fs::path(a.out) / "spec.json").string(), spec_to_json(batch.spec).dump(2) + "\n");
    for (const auto& w : batch.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

struct DiscoverArgs {
    std::string data;
    std::string out;
    std::string configPath;
    std::string truthPath;
    std::string givenSkeleton;
    std::string algorithm = "smmvpc";
    bool skeletonOnly = false;
    // flag overrides; negative/empty means "keep config value"
    double alpha = -1;
    std::int64_t seed = -1;
    int maxCond = -1;
    int maxParents = -1;
    int sweeps = -1;
    int maxKernelSamples = -1;
    std::string mode;
};

RunConfig load_run_config(const DiscoverArgs& a) {
    RunConfig cfg;
    if (!a.configPath.empty())
        cfg = run_config_from_json(ordered_json::parse(read_text(a.configPath)));
    if (a.alpha > 0) cfg.alpha = a.alpha;
    if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
    if (a.maxCond >= 0) cfg.maxCond = a.maxCond;
    if (a.maxParents > 0) cfg.maxParents = a.maxParents;
    if (a.sweeps > 0) cfg.correctionSweeps = a.sweeps;
    if (a.maxKernelSamples > 0) cfg.maxKernelSamples = a.maxKernelSamples;
    if (!a.mode.empty()) cfg.mode = a.mode;
    cfg.validate();
    return cfg;
}

MGraph truth_graph_from_file(const std::string& path) {
    ordered_json j = ordered_json::parse(read_text(path));
    if (j.contains("graph")) return mgraph_from_json(j.at("graph"));
    return mgraph_from_json(j);
}

int cmd_discover(const DiscoverArgs& a) {
    RunConfig cfg = load_run_config(a);
    fs::create_directories(a.out);

    const bool oracle = cfg.mode == "oracle";
    if (oracle && a.truthPath.empty())
        throw CLI::ValidationError("--truth is required in oracle mode");

    std::unique_ptr<Dataset> data;
    if (!a.data.empty()) data = std::make_unique<Dataset>(read_csv(a.data));
    if (!oracle && !data) throw CLI::ValidationError("--data is required in statistical mode");

    std::unique_ptr<MGraph> truth;
    if (!a.truthPath.empty()) truth = std::make_unique<MGraph>(truth_graph_from_file(a.truthPath));

    std::unique_ptr<CiEngine> ci;
    if (oracle) ci = std::make_unique<OracleCiEngine>(*truth);
    else ci = std::make_unique<StatisticalCiEngine>(*data, cfg.test_config());

    SkeletonResult sk = [&] {
        if (!a.givenSkeleton.empty()) {
            ordered_json j = ordered_json::parse(read_text(a.givenSkeleton));
            if (j.contains("pattern")) {
                SkeletonResult r{pattern_from_json(j.at("pattern")), {}, {}, {}, true, {}};
                if (j.contains("selfMasking"))
                    for (const auto& n : j.at("selfMasking"))
                        r.selfMaskingIndicators.push_back(r.pattern.index_of(n.get<std::string>()));
                return r;
            }
            return SkeletonResult{pattern_from_json(j), {}, {}, {}, true, {}};
        }
        if (a.algorithm == "tdpc") return tdpc_baseline(*ci, cfg.skeleton_options());
        return sm_mvpc(*ci, cfg.skeleton_options());
    }();

    write_text((fs::path(a.out) / "skeleton.json").string(), skeleton_result_to_json(sk).dump(2) + "\n");
    write_text((fs::path(a.out) / "skeleton.dot").string(), pattern_to_dot(sk.pattern));

    std::vector<AuditRecord> audit = sk.audit;
    if (!a.skeletonOnly) {
        // any directed substantive edges of a supplied skeleton are treated
        // as adjacency only
        SkeletonResult base = sk;
        {
            Pattern p = base.pattern;
            for (auto [x, y] : base.pattern.directed_edges()) {
                if (p.node(y).kind != NodeKind::Substantive) continue;
                p = p.with_directed_removed(x, y);
                Pattern q(p.nodes(), p.directed_edges(), [&] {
                    auto und = p.undirected_edges();
                    und.emplace_back(std::min(x, y), std::max(x, y));
                    return und;
                }());
                p = q;
            }
            base.pattern = p;
        }
        InPattern in = [&] {
            if (oracle) {
                OracleAnmEngine engine(*truth);
                InPattern r = lcs_md(engine, base, cfg.direction_options());
                for (auto& rec : engine.audit) audit.push_back(rec);
                return r;
            }
            StatisticalAnmEngine engine(*data, cfg.test_config());
            InPattern r = lcs_md(engine, base, cfg.direction_options());
            for (auto& rec : engine.audit) audit.push_back(rec);
            return r;
        }();
        write_text((fs::path(a.out) / "pattern.json").string(), in_pattern_to_json(in).dump(2) + "\n");
        write_text((fs::path(a.out) / "pattern.dot").string(), in_pattern_to_dot(in));
    }
    write_audit_log((fs::path(a.out) / "audit.jsonl").string(), audit);
    return 0;
}

struct EvalArgs {
    std::string est, truth, out;
};

int cmd_eval(const EvalArgs& a) {
    ordered_json je = ordered_json::parse(read_text(a.est));
    ordered_json jt = ordered_json::parse(read_text(a.truth));
    MGraph truth = jt.contains("graph") ? mgraph_from_json(jt.at("graph")) : mgraph_from_json(jt);

    Pattern est = je.contains("pattern") ? pattern_from_json(je.at("pattern")) : pattern_from_json(je);
    InPattern in{est, {}, {}, {}};
    SkeletonResult sk{est, {}, {}, {}, true, {}};
    if (je.contains("selfMasking"))
        for (const auto& n : je.at("selfMasking"))
            sk.selfMaskingIndicators.push_back(est.index_of(n.get<std::string>()));

    EvalReport report;
    report.skeleton = skeleton_metrics(est, truth);
    report.orientation = orientation_metrics(in, truth);
    report.indicator = indicator_metrics(sk, truth);

    fs::create_directories(a.out);
    write_text((fs::path(a.out) / "report.json").string(), eval_report_to_json(report).dump(2) + "\n");
    write_text((fs::path(a.out) / "report.csv").string(),
               eval_report_csv_header() + "\n" + eval_report_csv_row(report) + "\n");
    return 0;
}

struct SweepArgs {
    std::string gridPath, out;
    int seeds = -1;
    int jobs = 0;
};

struct SweepRow {
    std::string key;
    bool failed = false;
    std::string error;
    std::string csv;
};

int cmd_sweep(const SweepArgs& a) {
    ordered_json grid = ordered_json::parse(read_text(a.gridPath));
    const int vars = grid.value("vars", 10);
    const int pdCount = grid.value("parentDriven", 2);
    std::vector<int> smGrid;
    if (grid.contains("selfMasking"))
        for (const auto& v : grid.at("selfMasking")) smGrid.push_back(v.get<int>());
    else smGrid = {3};
    std::vector<int> nGrid;
    if (grid.contains("n"))
        for (const auto& v : grid.at("n")) nGrid.push_back(v.get<int>());
    else nGrid = {7000};
    int seeds = a.seeds > 0 ? a.seeds : grid.value("seeds", 20);
    std::vector<std::string> algorithms;
    if (grid.contains("algorithms"))
        for (const auto& v : grid.at("algorithms")) algorithms.push_back(v.get<std::string>());
    else algorithms = {"smmvpc", "tdpc"};
    const bool skeletonOnly = grid.value("skeletonOnly", true);

    RunConfig cfg;
    if (grid.contains("config")) cfg = run_config_from_json(grid.at("config"));
    SpecOptions sopts;
    sopts.targetMissingRate = grid.value("rate", 0.2);
    sopts.expectedDegree = grid.value("edgeDegree", 2.0);

    struct Cell {
        int n, sm, seedIdx;
        std::string algorithm;
    };
    std::vector<Cell> cells;
    for (int n : nGrid)
        for (int sm : smGrid)
            for (int s = 0; s < seeds; ++s)
                for (const auto& alg : algorithms) cells.push_back({n, sm, s, alg});

    auto run_cell = [&](const Cell& c) -> SweepRow {
        std::ostringstream key;
        key << c.n << ',' << c.sm << ',' << c.seedIdx << ',' << c.algorithm;
        SweepRow row{key.str(), false, "", ""};
        try {
            std::uint64_t cellSeed = hash_mix(cfg.seed, 0x73776565ULL, c.seedIdx);
            auto specs = nested_sweep_specs(vars, pdCount, smGrid, cellSeed, sopts);
            const ScmSpec* spec = nullptr;
            for (std::size_t i = 0; i < smGrid.size(); ++i)
                if (smGrid[i] == c.sm) spec = &specs[i];
            GeneratedBatch batch = sample(*spec, c.n);
            RunConfig rc = cfg;
            rc.seed = hash_mix(cellSeed, 17);
            StatisticalCiEngine engine(batch.dataset, rc.test_config());
            SkeletonResult sk = c.algorithm == "tdpc" ? tdpc_baseline(engine, rc.skeleton_options())
                                                      : sm_mvpc(engine, rc.skeleton_options());
            MGraph truth = spec->to_mgraph();
            EvalReport rep;
            rep.seed = cellSeed;
            rep.n = c.n;
            rep.skeleton = skeleton_metrics(sk.pattern, truth);
            rep.indicator = indicator_metrics(sk, truth);
            if (!skeletonOnly) {
                StatisticalAnmEngine anm(batch.dataset, rc.test_config());
                InPattern in = lcs_md(anm, sk, rc.direction_options());
                rep.orientation = orientation_metrics(in, truth);
            }
            std::ostringstream os;
            os << row.key << ",ok," << eval_report_csv_row(rep);
            row.csv = os.str();
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            row.csv = row.key + ",error," + e.what();
        }
        return row;
    };

    const int jobs = a.jobs > 0 ? a.jobs : static_cast<int>(std::thread::hardware_concurrency());
    std::vector<SweepRow> rows(cells.size());
    std::size_t next = 0;
    while (next < cells.size()) {
        std::size_t batchEnd = std::min(cells.size(), next + static_cast<std::size_t>(std::max(1, jobs)));
        std::vector<std::future<SweepRow>> futs;
        for (std::size_t i = next; i < batchEnd; ++i)
            futs.push_back(std::async(std::launch::async, run_cell, cells[i]));
        for (std::size_t i = next; i < batchEnd; ++i) rows[i] = futs[i - next].get();
        next = batchEnd;
    }

    std::ostringstream os;
    os << "n,self_masking,seed,algorithm,status," << eval_report_csv_header() << "\n";
    for (const auto& r : rows) os << r.csv << "\n";
    fs::create_directories(a.out);
    write_text((fs::path(a.out) / "sweep.csv").string(), os.str());

    int failures = 0;
    for (const auto& r : rows) failures += r.failed ? 1 : 0;
    if (failures) std::cerr << failures << " sweep cell(s) failed; see sweep.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal structure learning from data with missing values"};
    app.require_subcommand(1);

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "sample a synthetic benchmark dataset");
    gen->add_option("--vars", ga.vars, "number of variables")->check(CLI::PositiveNumber);
    gen->add_option("--missing", ga.missing, "number of partially observed variables");
    gen->add_option("--self-masking", ga.selfMasking, "number of self-masking variables");
    gen->add_option("--n", ga.n, "sample size")->check(CLI::PositiveNumber);
    gen->add_option("--seed", ga.seed, "random seed");
    gen->add_option("--edge-degree", ga.edgeDegree, "expected degree of the random DAG");
    gen->add_option("--rate", ga.rate, "target missing rate")->check(CLI::Range(0.0, 0.9));
    gen->add_option("--mechanism", ga.mechanism, "mlp | linear")
        ->check(CLI::IsMember({"mlp", "linear"}));
    gen->add_option("--noise", ga.noise, "uniform | gaussian | laplace")
        ->check(CLI::IsMember({"uniform", "gaussian", "laplace"}));
    gen->add_option("--mask", ga.mask, "logistic | threshold")
        ->check(CLI::IsMember({"logistic", "threshold"}));
    gen->add_option("--pd-parents", ga.pdParents, "parents per parent-driven indicator");
    gen->add_option("--out", ga.out, "output directory")->required();

    DiscoverArgs da;
    auto* dis = app.add_subcommand("discover", "learn skeleton and directions from a CSV");
    dis->add_option("--data", da.data, "input CSV");
    dis->add_option("--out", da.out, "output directory")->required();
    dis->add_option("--config", da.configPath, "run configuration JSON");
    dis->add_option("--truth", da.truthPath, "ground-truth JSON (oracle mode)");
    dis->add_option("--given-skeleton", da.givenSkeleton, "skip skeleton learning, use this file");
    dis->add_option("--algorithm", da.algorithm, "smmvpc | tdpc")
        ->check(CLI::IsMember({"smmvpc", "tdpc"}));
    dis->add_flag("--skeleton-only", da.skeletonOnly, "stop after skeleton learning");
    dis->add_option("--alpha", da.alpha, "significance level override");
    dis->add_option("--seed", da.seed, "seed override");
    dis->add_option("--max-cond", da.maxCond, "conditioning set cap override");
    dis->add_option("--max-parents", da.maxParents, "parent set cap override");
    dis->add_option("--sweeps", da.sweeps, "correction sweep cap override");
    dis->add_option("--max-kernel-samples", da.maxKernelSamples, "kernel sample cap override");
    dis->add_option("--mode", da.mode, "statistical | oracle")
        ->check(CLI::IsMember({"statistical", "oracle"}));

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "score an estimate against ground truth");
    ev->add_option("--est", ea.est, "estimated structure JSON")->required();
    ev->add_option("--truth", ea.truth, "ground-truth JSON")->required();
    ev->add_option("--out", ea.out, "output directory")->required();

    SweepArgs sa;
    auto* sw = app.add_subcommand("sweep", "generate-discover-eval over a grid");
    sw->add_option("--grid", sa.gridPath, "grid JSON")->required();
    sw->add_option("--out", sa.out, "output directory")->required();
    sw->add_option("--seeds", sa.seeds, "seed count override");
    sw->add_option("--jobs", sa.jobs, "concurrent cells");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            if (ga.selfMasking > ga.missing || ga.missing > ga.vars) {
                std::cerr << "error: need self-masking <= missing <= vars\n";
                return 2;
            }
            return cmd_generate(ga);
        }
        if (dis->parsed()) return cmd_discover(da);
        if (ev->parsed()) return cmd_eval(ea);
        if (sw->parsed()) return cmd_sweep(sa);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
