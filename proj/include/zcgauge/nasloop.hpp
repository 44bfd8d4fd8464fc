// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <set>
#include <string>
#include <vector>

#include "zcgauge/gbrt.hpp"
#include "zcgauge/scorestore.hpp"

namespace zcgauge::nas {

enum class FeatureSet { Encoding, Zc, Both };
FeatureSet parse_feature_set(const std::string& name);

// Per-proxy quantile normalizer fit on training rows; invalid scores are
// imputed at the median quantile.
class Normalizer {
  public:
    void fit(const std::vector<const Row*>& rows);
    double transform(size_t proxy_index, const ProxyResult* r) const;
    bool fitted() const { return fitted_; }

  private:
    std::vector<std::vector<double>> sorted_;  // per catalog proxy
    bool fitted_ = false;
};

// encoding -> one-hot per edge (30 dims), zc -> 13 quantile-normalized
// scores, both -> concatenation (43 dims).
Eigen::RowVectorXd featurize(const Row& row, FeatureSet fs, const Normalizer& norm);

struct Surrogate {
    GbrtParams params;
    Normalizer norm;
    Gbrt model;

    void fit(const std::vector<const Row*>& rows, FeatureSet fs, uint64_t seed);
    Eigen::VectorXd predict(const std::vector<const Row*>& rows, FeatureSet fs) const;
};

struct EvalStats {
    double mean = 0.0;
    double sd = 0.0;
};

// The 100-train / 1000-test disjoint-resample protocol.
EvalStats standalone_eval(const ScoreTable& table, FeatureSet fs, int n_train = 100,
                          int n_test = 1000, int trials = 100, uint64_t seed = 0);

struct SearchConfig {
    int budget = 200;
    int init = 10;
    int candidates = 100;
    std::string algo = "bananas";
    FeatureSet fs = FeatureSet::Both;
    uint64_t seed = 0;
};

struct TraceStep {
    std::string arch_id;
    double val_acc = 0.0;
    double best_so_far = 0.0;
    double sim_seconds = 0.0;
};

struct SearchTrace {
    std::vector<TraceStep> steps;
    std::set<std::string> zc_consumed;  // archs whose proxy values were queried
    FeatureSet fs = FeatureSet::Both;
    bool train_time_missing = false;
};

SearchTrace run_bananas(const ScoreTable& table, const SearchConfig& config);
SearchTrace run_npenas(const ScoreTable& table, const SearchConfig& config);

struct RuntimeReport {
    double seconds = 0.0;
    bool train_time_missing = false;  // proxy-time-only when set
};
RuntimeReport simulated_runtime(const SearchTrace& trace, const ScoreTable& table);

}  // namespace zcgauge::nas
