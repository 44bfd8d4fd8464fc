// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "zcgauge/archspace.hpp"
#include "zcgauge/proxies.hpp"

namespace zcgauge {

struct Row {
    std::string id;
    std::string encoding;  // canonical cell string; may be empty for imports
    double val_acc = 0.0;
    std::optional<double> train_time;
    std::map<std::string, ProxyResult> scores;
    std::map<std::string, std::string> extras;  // unmapped import fields
};

// Immutable benchmark table: architecture -> ground truth + proxy scores.
struct ScoreTable {
    int schema_version = 1;
    std::string benchmark;
    std::string task;
    TaskKind task_kind = TaskKind::Classification;
    std::vector<std::string> proxy_ids;
    std::vector<Row> rows;

    void build_index();
    const Row& row(const std::string& arch_id) const;
    bool has_row(const std::string& arch_id) const;

  private:
    std::unordered_map<std::string, size_t> index_;
};

void save(const ScoreTable& table, const std::string& path);
ScoreTable load(const std::string& path);

// Constant-time lookup; throws a not-found error naming the missing key.
const ProxyResult& query(const ScoreTable& table, const std::string& arch_id,
                         const std::string& proxy_id);

struct SyntheticSpec {
    long n_archs = 1000;
    double noise_sd = 0.1;
    // Planted ground truth: val_acc = sum of weight * standardized feature + noise.
    // Feature keys: conv_pool, cell_size, num_skip, num_params.
    std::map<std::string, double> feature_weights = {
        {"conv_pool", 0.3}, {"cell_size", 0.3}, {"num_params", 0.4}};
    // Per-proxy correlation strength with the planted accuracy, in [-1, 1].
    std::map<std::string, double> fidelity;  // defaults to 0.5 for all 13
    std::string benchmark = "synthetic";
    std::string task = "synthetic";
};

ScoreTable generate_synthetic(const SyntheticSpec& spec, uint64_t seed);

// Registered adapters: "canonical" (identity) and "naslib" (alias-mapped
// {arch: {proxy: {score, time}, val_accuracy}} layout).
ScoreTable import_external(const std::string& path, const std::string& format_id);
std::vector<std::string> registered_adapters();

struct ComputeOptions {
    int batch_size = 32;
    int jobs = 1;
    std::string benchmark = "nb201-desk";
    std::string task = "synthetic-classification";
    TaskKind task_kind = TaskKind::Classification;
};

// Runs compute_all per encoding, persisting each row to an append log
// (path + ".log") before the final compaction into `path`. An existing
// log is resumed, not recomputed.
ScoreTable compute_and_store(const std::vector<CellEncoding>& encodings, const NetworkSpec& spec,
                             uint64_t seed, const std::string& path,
                             const ComputeOptions& opt = {});

}  // namespace zcgauge
