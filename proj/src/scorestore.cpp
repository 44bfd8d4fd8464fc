// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include "zcgauge/scorestore.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

namespace zcgauge {

using nlohmann::json;

namespace {

json result_to_json(const ProxyResult& r) {
    return json{{"score", r.score}, {"seconds", r.seconds}, {"valid", r.valid}};
}

ProxyResult result_from_json(const std::string& name, const json& j) {
    ProxyResult r;
    r.name = name;
    r.score = j.at("score").get<double>();
    r.seconds = j.at("seconds").get<double>();
    r.valid = j.at("valid").get<bool>();
    return r;
}

json row_to_json(const Row& row) {
    json scores = json::object();
    for (const auto& [name, r] : row.scores) scores[name] = result_to_json(r);
    json j{{"id", row.id},
           {"encoding", row.encoding},
           {"val_acc", row.val_acc},
           {"scores", scores}};
    if (row.train_time) j["train_time"] = *row.train_time;
    if (!row.extras.empty()) j["extras"] = row.extras;
    return j;
}

Row row_from_json(const json& j) {
    Row row;
    row.id = j.at("id").get<std::string>();
    row.encoding = j.at("encoding").get<std::string>();
    row.val_acc = j.at("val_acc").get<double>();
    if (j.contains("train_time")) row.train_time = j.at("train_time").get<double>();
    if (j.contains("extras"))
        row.extras = j.at("extras").get<std::map<std::string, std::string>>();
    for (const auto& [name, rj] : j.at("scores").items())
        row.scores.emplace(name, result_from_json(name, rj));
    return row;
}

std::string task_kind_str(TaskKind k) {
    return k == TaskKind::Classification ? "classification" : "regression";
}

TaskKind task_kind_parse(const std::string& s) {
    if (s == "classification") return TaskKind::Classification;
    if (s == "regression") return TaskKind::Regression;
    throw std::runtime_error("unknown task_kind '" + s + "'");
}

json table_to_json(const ScoreTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) rows.push_back(row_to_json(r));
    return json{{"schema_version", t.schema_version},
                {"benchmark", t.benchmark},
                {"task", t.task},
                {"task_kind", task_kind_str(t.task_kind)},
                {"proxy_ids", t.proxy_ids},
                {"rows", rows}};
}

ScoreTable table_from_json(const json& j) {
    constexpr int kSupportedSchema = 1;
    const int version = j.at("schema_version").get<int>();
    if (version != kSupportedSchema)
        throw std::runtime_error("schema version mismatch: found " + std::to_string(version) +
                                 ", expected " + std::to_string(kSupportedSchema));
    ScoreTable t;
    t.schema_version = version;
    t.benchmark = j.at("benchmark").get<std::string>();
    t.task = j.at("task").get<std::string>();
    t.task_kind = task_kind_parse(j.at("task_kind").get<std::string>());
    t.proxy_ids = j.at("proxy_ids").get<std::vector<std::string>>();
    for (const auto& rj : j.at("rows")) t.rows.push_back(row_from_json(rj));
    t.build_index();
    return t;
}

}  // namespace

void ScoreTable::build_index() {
    index_.clear();
    index_.reserve(rows.size() * 2);
    for (size_t i = 0; i < rows.size(); ++i) {
        auto [it, inserted] = index_.emplace(rows[i].id, i);
        if (!inserted) throw std::runtime_error("duplicate arch id '" + rows[i].id + "'");
    }
}

const Row& ScoreTable::row(const std::string& arch_id) const {
    auto it = index_.find(arch_id);
    if (it == index_.end()) throw std::runtime_error("arch id not found: '" + arch_id + "'");
    return rows[it->second];
}

bool ScoreTable::has_row(const std::string& arch_id) const { return index_.count(arch_id) > 0; }

void save(const ScoreTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << table_to_json(table).dump(1) << "\n";
}

ScoreTable load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return table_from_json(json::parse(in));
}

const ProxyResult& query(const ScoreTable& table, const std::string& arch_id,
                         const std::string& proxy_id) {
    const Row& r = table.row(arch_id);
    auto it = r.scores.find(proxy_id);
    if (it == r.scores.end()) throw std::runtime_error("proxy id not found: '" + proxy_id + "'");
    return it->second;
}

namespace {

std::vector<double> zscore(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0, ss = 0;
    for (double x : v) mean += x;
    mean /= n;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / n);
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = sd > 0 ? (v[i] - mean) / sd : 0.0;
    return out;
}

// Average ranks mapped to [0, 1].
std::vector<double> rank_standardize(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> out(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k <= j; ++k) out[order[k]] = n > 1 ? r / (n - 1) : 0.0;
        i = j + 1;
    }
    return out;
}

}  // namespace

ScoreTable generate_synthetic(const SyntheticSpec& spec, uint64_t seed) {
    if (spec.n_archs < 10) throw std::invalid_argument("synthetic: n_archs must be >= 10");
    for (const auto& [p, f] : spec.fidelity)
        if (f < -1.0 || f > 1.0) throw std::invalid_argument("synthetic: fidelity out of [-1,1]");
    Rng rng(seed);
    const long n = std::min<long>(spec.n_archs, kSpaceSize);

    // Sample distinct encodings (partial Fisher-Yates over indices).
    std::vector<long> idx(kSpaceSize);
    for (long i = 0; i < kSpaceSize; ++i) idx[static_cast<size_t>(i)] = i;
    for (long i = 0; i < n; ++i) {
        std::uniform_int_distribution<long> d(i, kSpaceSize - 1);
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(d(rng))]);
    }

    NetworkSpec net;
    std::vector<CellEncoding> encs;
    std::map<std::string, std::vector<double>> feats;
    for (long i = 0; i < n; ++i) {
        const CellEncoding enc = CellEncoding::from_index(idx[static_cast<size_t>(i)]);
        encs.push_back(enc);
        const ArchFeatures f = features_analytic(enc, net);
        feats["conv_pool"].push_back(f.conv_pool_ratio);
        feats["cell_size"].push_back(f.cell_size);
        feats["num_skip"].push_back(f.num_skip);
        feats["num_params"].push_back(static_cast<double>(f.num_params));
    }
    std::map<std::string, std::vector<double>> zfeats;
    for (const auto& [k, v] : feats) zfeats[k] = zscore(v);

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> val(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const auto& [k, w] : spec.feature_weights) {
            auto it = zfeats.find(k);
            if (it == zfeats.end())
                throw std::invalid_argument("synthetic: unknown feature '" + k + "'");
            acc += w * it->second[static_cast<size_t>(i)];
        }
        val[static_cast<size_t>(i)] = acc + spec.noise_sd * gauss(rng);
    }
    const std::vector<double> zval = zscore(val);

    ScoreTable t;
    t.benchmark = spec.benchmark;
    t.task = spec.task;
    t.task_kind = TaskKind::Classification;
    t.proxy_ids = proxy_catalog();
    t.rows.resize(static_cast<size_t>(n));

    std::lognormal_distribution<double> secs(std::log(2.6) - 0.125, 0.5);
    for (long i = 0; i < n; ++i) {
        Row& row = t.rows[static_cast<size_t>(i)];
        row.id = "synth-" + std::to_string(idx[static_cast<size_t>(i)]);
        row.encoding = encs[static_cast<size_t>(i)].to_string();
        row.val_acc = val[static_cast<size_t>(i)];
        row.train_time = 1000.0 + 100.0 * zfeats["num_params"][static_cast<size_t>(i)];
    }
    for (const std::string& p : t.proxy_ids) {
        double fid = 0.5;
        if (auto it = spec.fidelity.find(p); it != spec.fidelity.end()) fid = it->second;
        std::vector<double> raw(static_cast<size_t>(n));
        for (long i = 0; i < n; ++i)
            raw[static_cast<size_t>(i)] =
                fid * zval[static_cast<size_t>(i)] + (1.0 - std::abs(fid)) * gauss(rng);
        const std::vector<double> scores = rank_standardize(raw);
        for (long i = 0; i < n; ++i) {
            ProxyResult r;
            r.name = p;
            r.score = scores[static_cast<size_t>(i)];
            r.seconds = secs(rng);
            t.rows[static_cast<size_t>(i)].scores.emplace(p, r);
        }
    }
    t.build_index();
    return t;
}

namespace {

const std::map<std::string, std::string>& proxy_aliases() {
    static const std::map<std::string, std::string> aliases = {
        {"jacob_cov", "jacov"},   {"epe-nas", "epe_nas"},   {"grad-norm", "grad_norm"},
        {"l2-norm", "l2_norm"},   {"zen-score", "zen"},     {"zen_score", "zen"},
        {"nwot", "nwot"},
    };
    return aliases;
}

std::string normalize_proxy_id(const std::string& id) {
    auto it = proxy_aliases().find(id);
    return it != proxy_aliases().end() ? it->second : id;
}

ScoreTable import_naslib(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    const json j = json::parse(in);
    const auto& catalog = proxy_catalog();
    const std::set<std::string> known(catalog.begin(), catalog.end());

    ScoreTable t;
    t.benchmark = "imported";
    t.task = std::filesystem::path(path).stem().string();
    t.proxy_ids = catalog;
    std::set<std::string> seen_proxies;
    for (const auto& [arch, entry] : j.items()) {
        Row row;
        row.id = arch;
        try {
            row.encoding = CellEncoding::parse(arch).to_string();
        } catch (const std::exception&) {
            row.encoding = "";
        }
        bool have_acc = false;
        for (const auto& [key, value] : entry.items()) {
            if (key == "val_accuracy" || key == "val_acc") {
                row.val_acc = value.get<double>();
                have_acc = true;
            } else if (key == "train_time") {
                row.train_time = value.get<double>();
            } else if (value.is_object() && value.contains("score")) {
                const std::string pid = normalize_proxy_id(key);
                ProxyResult r;
                r.name = pid;
                r.score = value.at("score").is_number() ? value.at("score").get<double>() : 0.0;
                r.valid = value.at("score").is_number() &&
                          std::isfinite(value.at("score").get<double>());
                r.seconds = value.contains("time") ? value.at("time").get<double>() : 0.0;
                if (known.count(pid)) {
                    row.scores.emplace(pid, r);
                    seen_proxies.insert(pid);
                } else {
                    row.extras[key] = value.dump();
                }
            } else {
                row.extras[key] = value.dump();
            }
        }
        if (!have_acc) throw std::runtime_error("import: ground truth required (no val_accuracy)");
        t.rows.push_back(std::move(row));
    }
    t.proxy_ids.assign(seen_proxies.begin(), seen_proxies.end());
    t.build_index();
    return t;
}

}  // namespace

std::vector<std::string> registered_adapters() { return {"canonical", "naslib"}; }

ScoreTable import_external(const std::string& path, const std::string& format_id) {
    if (format_id == "canonical") return load(path);
    if (format_id == "naslib") return import_naslib(path);
    std::string known;
    for (const auto& a : registered_adapters()) known += (known.empty() ? "" : ", ") + a;
    throw std::runtime_error("unknown import format '" + format_id + "' (registered: " + known +
                             ")");
}

ScoreTable compute_and_store(const std::vector<CellEncoding>& encodings, const NetworkSpec& spec,
                             uint64_t seed, const std::string& path, const ComputeOptions& opt) {
    const std::string log_path = path + ".log";
    std::map<long, Row> done;

    // Resume from an interrupted run.
    if (std::filesystem::exists(log_path)) {
        std::ifstream in(log_path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                const json j = json::parse(line);
                done[j.at("i").get<long>()] = row_from_json(j.at("row"));
            } catch (const std::exception&) {
                break;  // truncated tail from a crash; recompute from here
            }
        }
    }

    const Minibatch batch = synthetic_minibatch(opt.batch_size, spec.in_channels, spec.resolution,
                                                spec.classes, seed);
    std::ofstream log(log_path, std::ios::binary | std::ios::app);
    std::mutex mu;

    auto compute_row = [&](long i) {
        const CellEncoding& enc = encodings[static_cast<size_t>(i)];
        Row row;
        row.id = enc.to_string();
        row.encoding = row.id;
        const ArchFeatures f = features_analytic(enc, spec);
        // Desk-scale stand-in ground truth: planted structural signal
        // (real trained accuracies are imported, never computed here).
        row.val_acc = 0.1 * f.conv_pool_ratio + 0.1 * f.cell_size +
                      1e-4 * static_cast<double>(f.num_params);
        row.train_time = 100.0 + 0.02 * static_cast<double>(f.num_params);
        try {
            const Graph g = build_network(enc, spec, seed + static_cast<uint64_t>(i));
            auto results = compute_all(g, batch, opt.task_kind, seed + static_cast<uint64_t>(i));
            for (auto& r : results) row.scores.emplace(r.name, std::move(r));
        } catch (const std::exception& e) {
            row.extras["error"] = e.what();
            for (const auto& p : proxy_catalog()) {
                ProxyResult r;
                r.name = p;
                r.valid = false;
                r.seconds = 1e-9;
                row.scores.emplace(p, r);
            }
        }
        std::lock_guard<std::mutex> lk(mu);
        log << json{{"i", i}, {"row", row_to_json(row)}}.dump() << "\n";
        done[i] = std::move(row);
    };

    std::vector<long> todo;
    for (long i = 0; i < static_cast<long>(encodings.size()); ++i)
        if (!done.count(i)) todo.push_back(i);

    const int jobs = std::max(1, opt.jobs);
    if (jobs == 1) {
        for (long i : todo) compute_row(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (size_t k = next++; k < todo.size(); k = next++) compute_row(todo[k]);
            });
        for (auto& th : pool) th.join();
    }
    log.close();

    ScoreTable t;
    t.benchmark = opt.benchmark;
    t.task = opt.task;
    t.task_kind = opt.task_kind;
    t.proxy_ids = proxy_catalog();
    for (auto& [i, row] : done) t.rows.push_back(std::move(row));
    t.build_index();
    save(t, path);
    std::filesystem::remove(log_path);
    return t;
}

}  // namespace zcgauge
