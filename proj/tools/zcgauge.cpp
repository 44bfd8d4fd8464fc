// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.
//
// zcgauge command-line entry point.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
// All errors are emitted to stderr as a single JSON line.
// Every output artifact gets a sibling `<out>.manifest.json` recording the
// resolved configuration; replaying a manifest's command line reproduces the
// artifact byte-identically for deterministic subcommands.

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "zcgauge/analysis.hpp"
#include "zcgauge/archspace.hpp"
#include "zcgauge/biaslab.hpp"
#include "zcgauge/nasloop.hpp"
#include "zcgauge/scorestore.hpp"

using json = nlohmann::ordered_json;
using namespace zcgauge;
namespace za = zcgauge::analysis;
namespace zb = zcgauge::bias;
namespace zn = zcgauge::nas;

namespace {

constexpr const char* kVersion = "zcgauge 0.1.0";

uint64_t default_seed() {
    if (const char* env = std::getenv("ZCGAUGE_SEED"); env != nullptr)
        return std::strtoull(env, nullptr, 10);
    return 0;
}

int default_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
    f << text;
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

// Manifest beside every output artifact.
void write_manifest(const std::string& subcommand, const json& config, uint64_t seed,
                    const std::vector<std::string>& inputs, const std::string& out,
                    double wall_seconds) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["seed"] = seed;
    m["inputs"] = inputs;
    m["outputs"] = json::array({out});
    m["version"] = kVersion;
    m["wall_clock_seconds"] = wall_seconds;
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m["finished_at"] = stamp;
    write_text(out + ".manifest.json", m.dump(2) + "\n");
}

json matrix_to_json(const za::Matrix& m) {
    json j;
    j["rows"] = m.row_names;
    j["cols"] = m.col_names;
    j["values"] = m.values;
    return j;
}

std::string matrix_to_csv(const za::Matrix& m) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "name";
    for (const auto& c : m.col_names) os << "," << c;
    os << "\n";
    for (size_t r = 0; r < m.row_names.size(); ++r) {
        os << m.row_names[r];
        for (double v : m.values[r]) os << "," << v;
        os << "\n";
    }
    return os.str();
}

void write_report(const std::string& out, const json& j, const za::Matrix* csv_matrix = nullptr) {
    if (ends_with(out, ".csv") && csv_matrix != nullptr)
        write_text(out, matrix_to_csv(*csv_matrix));
    else
        write_text(out, j.dump(2) + "\n");
}

// Per-proxy (score, val_acc) pairs over rows where the proxy is valid.
za::RankedPair proxy_pair(const ScoreTable& t, const std::string& proxy) {
    za::RankedPair pair;
    for (const Row& r : t.rows) {
        auto it = r.scores.find(proxy);
        if (it == r.scores.end() || !it->second.valid) continue;
        pair.ground.push_back(r.val_acc);
        pair.pred.push_back(it->second.score);
    }
    return pair;
}

// ---------------------------------------------------------------------------
// Subcommand payloads. Each returns the report/output json config for the
// manifest; throwing propagates to the top-level error mapper.

struct ComputeArgs {
    std::string space = "nb201";
    long limit = kSpaceSize;
    std::string out;
    uint64_t seed = default_seed();
    int batch = 32;
    int jobs = default_jobs();
};

void run_compute(const ComputeArgs& a) {
    if (a.space != "nb201") throw std::invalid_argument("unknown space '" + a.space + "'");
    ComputeOptions opt;
    opt.batch_size = a.batch;
    opt.jobs = a.jobs;
    compute_and_store(enumerate_space(a.limit), NetworkSpec{}, a.seed, a.out, opt);
}

struct SynthArgs {
    long n = 1000;
    double noise = 0.1;
    uint64_t seed = default_seed();
    std::vector<std::string> fidelity;  // proxy=value
    std::string out;
};

void run_synth(const SynthArgs& a) {
    SyntheticSpec spec;
    spec.n_archs = a.n;
    spec.noise_sd = a.noise;
    for (const std::string& kv : a.fidelity) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--fidelity expects proxy=value, got '" + kv + "'");
        spec.fidelity[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    save(generate_synthetic(spec, a.seed), a.out);
}

struct AnalyzeArgs {
    std::vector<std::string> tables;
    std::string out;
    int k = 10;
    double frac = 0.0;  // 0 = use absolute k
    int trials = 100;
    std::string bins = "auto";
    std::string method = "all";  // orderings: random|greedy|exhaustive|all
    int k_max = 13;
    uint64_t seed = default_seed();
};

za::BinSpec parse_bins(const std::string& bins) {
    za::BinSpec b;
    if (bins != "auto") b.n_bins = std::stoi(bins);
    return b;
}

json analyze_corr(const ScoreTable& t) {
    json report;
    for (const std::string& p : t.proxy_ids) {
        const za::RankedPair pair = proxy_pair(t, p);
        json entry;
        entry["n"] = pair.ground.size();
        try {
            entry["spearman"] = za::spearman(pair);
            entry["pearson"] = za::pearson(pair.pred, pair.ground);
        } catch (const std::exception&) {
            entry["spearman"] = nullptr;
            entry["pearson"] = nullptr;
        }
        report[p] = entry;
    }
    return report;
}

json analyze_ranking(const AnalyzeArgs& a, const ScoreTable& t, bool precision) {
    json report;
    report["metric"] = precision ? "precision_at_k" : "best_ranking_at_k";
    report[a.frac > 0.0 ? "frac" : "k"] = a.frac > 0.0 ? json(a.frac) : json(a.k);
    json values;
    for (const std::string& p : t.proxy_ids) {
        const za::RankedPair pair = proxy_pair(t, p);
        try {
            double v;
            if (precision)
                v = a.frac > 0.0 ? za::precision_at_fraction(pair, a.frac)
                                 : za::precision_at_k(pair, a.k);
            else
                v = a.frac > 0.0 ? za::best_ranking_at_fraction(pair, a.frac)
                                 : za::best_ranking_at_k(pair, a.k);
            values[p] = v;
        } catch (const std::exception&) {
            values[p] = nullptr;
        }
    }
    report["values"] = values;
    return report;
}

json analyze_entropy(const AnalyzeArgs& a, const ScoreTable& t) {
    const za::EntropyReport rep = za::entropy_report(t, parse_bins(a.bins));
    json report;
    report["h_y_bits"] = rep.h_y;
    report["n_bins"] = rep.n_bins;
    report["sample_size"] = rep.sample_size;
    json per;
    for (size_t i = 0; i < rep.proxy_ids.size(); ++i) {
        json e;
        e["h_y_given_z"] = rep.h_y_given_z[i];
        e["info_gain"] = rep.info_gain[i];
        per[rep.proxy_ids[i]] = e;
    }
    report["proxies"] = per;
    return report;
}

json analyze_ig(const AnalyzeArgs& a, const ScoreTable& t, za::Matrix& csv) {
    const za::EntropyReport rep = za::entropy_report(t, parse_bins(a.bins));
    csv.row_names = rep.proxy_ids;
    csv.col_names = rep.proxy_ids;
    csv.values = rep.ig_pairs;
    return matrix_to_json(csv);
}

json ordering_to_json(const za::OrderingTrace& tr) {
    json j;
    j["h_bits"] = tr.h;
    j["chosen"] = tr.chosen;
    return j;
}

json analyze_orderings(const AnalyzeArgs& a, const ScoreTable& t) {
    const za::BinSpec bins = parse_bins(a.bins);
    json report;
    if (a.method == "random" || a.method == "all")
        report["random"] = ordering_to_json(za::ordering_random(t, a.trials, a.seed, bins));
    if (a.method == "greedy" || a.method == "all")
        report["greedy"] = ordering_to_json(za::ordering_greedy(t, bins));
    if (a.method == "exhaustive" || a.method == "all")
        report["exhaustive"] = ordering_to_json(za::ordering_exhaustive(t, a.k_max, bins));
    if (report.empty())
        throw std::invalid_argument("unknown orderings method '" + a.method + "'");
    return report;
}

json analyze_xbench(const AnalyzeArgs& a, const std::vector<ScoreTable>& tables,
                    za::Matrix& csv) {
    json report;
    report["generalization"] = matrix_to_json(za::generalization_matrix(tables, a.seed));
    csv = za::cross_benchmark_correlation(tables);
    report["cross_benchmark"] = matrix_to_json(csv);
    return report;
}

struct BiasArgs {
    std::string table;
    std::string proxy;
    std::string metric;
    std::string strategy = "performance";
    std::string out;
};

json bias_measure(const BiasArgs& a, const ScoreTable& t, za::Matrix& csv) {
    if (!a.proxy.empty() && !a.metric.empty()) {
        json r;
        r["proxy"] = a.proxy;
        r["metric"] = a.metric;
        r["bias"] = zb::bias(t, a.proxy, zb::parse_bias_metric(a.metric));
        return r;
    }
    csv = zb::bias_report(t);
    return matrix_to_json(csv);
}

json bias_mitigate(const BiasArgs& a, const ScoreTable& t) {
    if (a.proxy.empty() || a.metric.empty())
        throw std::invalid_argument("mitigate requires --proxy and --metric");
    const zb::MitigationResult r = zb::mitigate(t, a.proxy, zb::parse_bias_metric(a.metric),
                                                zb::parse_strategy(a.strategy));
    json j;
    j["proxy"] = r.proxy_id;
    j["metric"] = a.metric;
    j["strategy"] = a.strategy;
    if (r.c_is_infinite)
        j["c"] = "infinity";
    else
        j["c"] = r.c;
    j["c_is_infinite"] = r.c_is_infinite;
    j["original_bias"] = r.original_bias;
    j["new_bias"] = r.new_bias;
    j["original_perf"] = r.original_perf;
    j["new_perf"] = r.new_perf;
    return j;
}

struct NasArgs {
    std::string table;
    std::string algo = "bananas";
    std::string features = "both";
    int budget = 200;
    int init = 10;
    int candidates = 100;
    int trials = 400;
    uint64_t seed = default_seed();
    int jobs = default_jobs();
    std::string out;
};

void run_nas(const NasArgs& a) {
    const ScoreTable t = load(a.table);
    zn::SearchConfig base;
    base.budget = a.budget;
    base.init = a.init;
    base.candidates = a.candidates;
    base.algo = a.algo;
    base.fs = zn::parse_feature_set(a.features);
    auto algo = a.algo == "bananas" ? zn::run_bananas
              : a.algo == "npenas"  ? zn::run_npenas
                                    : nullptr;
    if (algo == nullptr) throw std::invalid_argument("unknown algo '" + a.algo + "'");

    std::vector<zn::SearchTrace> traces(static_cast<size_t>(a.trials));
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= a.trials) return;
            try {
                zn::SearchConfig cfg = base;
                cfg.seed = a.seed + static_cast<uint64_t>(i);
                traces[static_cast<size_t>(i)] = algo(t, cfg);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    const int n_threads = std::max(1, std::min(a.jobs, a.trials));
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);

    std::ostringstream os;
    os << std::setprecision(17);
    os << "trial,iteration,arch_id,val_acc,best_so_far,simulated_seconds\n";
    for (int i = 0; i < a.trials; ++i)
        for (size_t s = 0; s < traces[static_cast<size_t>(i)].steps.size(); ++s) {
            const zn::TraceStep& step = traces[static_cast<size_t>(i)].steps[s];
            os << i << "," << s << "," << step.arch_id << "," << step.val_acc << ","
               << step.best_so_far << "," << step.sim_seconds << "\n";
        }
    write_text(a.out, os.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zcgauge: zero-cost proxy evaluation toolkit"};
    app.require_subcommand(1);

    ComputeArgs ca;
    CLI::App* compute = app.add_subcommand("compute", "compute proxy scores over a search space");
    compute->add_option("--space", ca.space, "search space id")->capture_default_str();
    compute->add_option("--limit", ca.limit, "number of architectures")->capture_default_str();
    compute->add_option("--out", ca.out, "output table path")->required();
    compute->add_option("--seed", ca.seed, "rng seed (default: ZCGAUGE_SEED or 0)")
        ->capture_default_str();
    compute->add_option("--batch", ca.batch, "minibatch size")->capture_default_str();
    compute->add_option("--jobs", ca.jobs, "worker threads")->capture_default_str();

    SynthArgs sa;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic score table");
    synth->add_option("--n", sa.n, "number of architectures")->capture_default_str();
    synth->add_option("--noise", sa.noise, "ground-truth noise sd")->capture_default_str();
    synth->add_option("--fidelity", sa.fidelity, "per-proxy fidelity, proxy=value (repeatable)");
    synth->add_option("--seed", sa.seed, "rng seed (default: ZCGAUGE_SEED or 0)")
        ->capture_default_str();
    synth->add_option("--out", sa.out, "output table path")->required();

    std::string import_in, import_format = "naslib", import_out;
    CLI::App* imp = app.add_subcommand("import", "import an external score table");
    imp->add_option("--in", import_in, "input file")->required();
    imp->add_option("--format", import_format, "adapter id (canonical|naslib)")
        ->capture_default_str();
    imp->add_option("--out", import_out, "output table path")->required();

    AnalyzeArgs aa;
    CLI::App* analyze = app.add_subcommand("analyze", "correlation and entropy analyses");
    analyze->require_subcommand(1);
    for (const char* kind : {"corr", "prec", "bestrank", "entropy", "ig", "orderings", "xbench"}) {
        CLI::App* sub = analyze->add_subcommand(kind);
        sub->add_option("--table", aa.tables, "score table path (repeatable for xbench)")
            ->required();
        sub->add_option("--out", aa.out, "report path (.json or .csv)")->required();
        sub->add_option("--k", aa.k, "top-K threshold (prec/bestrank)")->capture_default_str();
        sub->add_option("--frac", aa.frac, "fractional K in (0,1]; overrides --k");
        sub->add_option("--trials", aa.trials, "random-ordering trials")->capture_default_str();
        sub->add_option("--bins", aa.bins, "histogram bins: auto or integer")
            ->capture_default_str();
        sub->add_option("--method", aa.method, "orderings: random|greedy|exhaustive|all")
            ->capture_default_str();
        sub->add_option("--k-max", aa.k_max, "exhaustive subset-size cap")->capture_default_str();
        sub->add_option("--seed", aa.seed, "rng seed (default: ZCGAUGE_SEED or 0)")
            ->capture_default_str();
    }

    BiasArgs ba;
    CLI::App* biascmd = app.add_subcommand("bias", "bias measurement and mitigation");
    biascmd->require_subcommand(1);
    for (const char* kind : {"measure", "mitigate"}) {
        CLI::App* sub = biascmd->add_subcommand(kind);
        sub->add_option("--table", ba.table, "score table path")->required();
        sub->add_option("--proxy", ba.proxy, "proxy id (or val_acc)");
        sub->add_option("--metric", ba.metric, "conv_pool|cell_size|num_skip|num_params");
        sub->add_option("--strategy", ba.strategy, "minimize|equalize|performance")
            ->capture_default_str();
        sub->add_option("--out", ba.out, "report path (.json or .csv)")->required();
    }

    NasArgs na;
    CLI::App* nascmd = app.add_subcommand("nas", "predictor-based search on a score table");
    nascmd->add_option("--table", na.table, "score table path")->required();
    nascmd->add_option("--algo", na.algo, "bananas|npenas")->capture_default_str();
    nascmd->add_option("--features", na.features, "encoding|zc|both")->capture_default_str();
    nascmd->add_option("--budget", na.budget, "evaluations per trial")->capture_default_str();
    nascmd->add_option("--init", na.init, "random initial evaluations")->capture_default_str();
    nascmd->add_option("--candidates", na.candidates, "candidates per iteration")
        ->capture_default_str();
    nascmd->add_option("--trials", na.trials, "independent trials")->capture_default_str();
    nascmd->add_option("--seed", na.seed, "base rng seed (default: ZCGAUGE_SEED or 0)")
        ->capture_default_str();
    nascmd->add_option("--jobs", na.jobs, "parallel trials")->capture_default_str();
    nascmd->add_option("--out", na.out, "trace CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        json err;
        err["error"] = e.what();
        err["code"] = 1;
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    try {
        if (compute->parsed()) {
            run_compute(ca);
            json cfg{{"space", ca.space}, {"limit", ca.limit}, {"batch", ca.batch},
                     {"jobs", ca.jobs}};
            write_manifest("compute", cfg, ca.seed, {}, ca.out, elapsed());
        } else if (synth->parsed()) {
            run_synth(sa);
            json cfg{{"n", sa.n}, {"noise", sa.noise}, {"fidelity", sa.fidelity}};
            write_manifest("synth", cfg, sa.seed, {}, sa.out, elapsed());
        } else if (imp->parsed()) {
            save(import_external(import_in, import_format), import_out);
            json cfg{{"format", import_format}};
            write_manifest("import", cfg, 0, {import_in}, import_out, elapsed());
        } else if (analyze->parsed()) {
            std::vector<ScoreTable> tables;
            for (const std::string& path : aa.tables) tables.push_back(load(path));
            const std::string kind = analyze->get_subcommands().front()->get_name();
            json report;
            za::Matrix csv;
            bool have_csv = false;
            if (kind == "corr") {
                report = analyze_corr(tables.front());
            } else if (kind == "prec") {
                report = analyze_ranking(aa, tables.front(), true);
            } else if (kind == "bestrank") {
                report = analyze_ranking(aa, tables.front(), false);
            } else if (kind == "entropy") {
                report = analyze_entropy(aa, tables.front());
            } else if (kind == "ig") {
                report = analyze_ig(aa, tables.front(), csv);
                have_csv = true;
            } else if (kind == "orderings") {
                report = analyze_orderings(aa, tables.front());
            } else {
                report = analyze_xbench(aa, tables, csv);
                have_csv = true;
            }
            write_report(aa.out, report, have_csv ? &csv : nullptr);
            json cfg{{"kind", kind},       {"k", aa.k},           {"frac", aa.frac},
                     {"trials", aa.trials}, {"bins", aa.bins},     {"method", aa.method},
                     {"k_max", aa.k_max}};
            write_manifest("analyze " + kind, cfg, aa.seed, aa.tables, aa.out, elapsed());
        } else if (biascmd->parsed()) {
            const ScoreTable t = load(ba.table);
            const std::string kind = biascmd->get_subcommands().front()->get_name();
            json report;
            za::Matrix csv;
            bool have_csv = false;
            if (kind == "measure") {
                report = bias_measure(ba, t, csv);
                have_csv = ba.proxy.empty() || ba.metric.empty();
            } else {
                report = bias_mitigate(ba, t);
            }
            write_report(ba.out, report, have_csv ? &csv : nullptr);
            json cfg{{"kind", kind},
                     {"proxy", ba.proxy},
                     {"metric", ba.metric},
                     {"strategy", ba.strategy}};
            write_manifest("bias " + kind, cfg, 0, {ba.table}, ba.out, elapsed());
        } else if (nascmd->parsed()) {
            run_nas(na);
            json cfg{{"algo", na.algo},       {"features", na.features},
                     {"budget", na.budget},   {"init", na.init},
                     {"candidates", na.candidates}, {"trials", na.trials},
                     {"jobs", na.jobs}};
            write_manifest("nas", cfg, na.seed, {na.table}, na.out, elapsed());
        }
    } catch (const std::invalid_argument& e) {
        // Bad user-supplied values (unknown ids, malformed options): data error.
        json err{{"error", e.what()}, {"code", 2}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    } catch (const std::logic_error& e) {
        json err{{"error", e.what()}, {"code", 3}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 3;
    } catch (const std::exception& e) {
        json err{{"error", e.what()}, {"code", 2}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    }
    return 0;
}
