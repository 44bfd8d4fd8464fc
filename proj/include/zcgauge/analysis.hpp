// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zcgauge/scorestore.hpp"

namespace zcgauge::analysis {

struct RankedPair {
    std::vector<double> ground;
    std::vector<double> pred;
};

// Average ranks (0-based, ties averaged), larger value = better = lower rank.
std::vector<double> descending_ranks(const std::vector<double>& v);

double spearman(const RankedPair& pair);
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// |{i : ground_rank_i < K and pred_rank_i < K}| / K, 0-based strict ranks.
double precision_at_k(const RankedPair& pair, int k);
// Minimum ground rank among the top-K predicted, divided by M.
double best_ranking_at_k(const RankedPair& pair, int k);

// Fractional-K convention: rank threshold frac * M, frac in (0, 1].
double precision_at_fraction(const RankedPair& pair, double frac);
double best_ranking_at_fraction(const RankedPair& pair, double frac);

// round(1 + 3.322 * ln N); natural log (yields 24 bins at N = 1000).
int sturges_bins(long n);

struct BinSpec {
    int n_bins = 0;  // 0 = auto via Sturges on the sample size
};

// Per-variable equal-width discretization over [min, max]. Constant columns
// collapse to one bin; NaN (invalid proxy) goes to a dedicated extra bin.
std::vector<int> discretize(const std::vector<double>& v, int n_bins);

// Plug-in conditional entropy in bits: H(y | zs), H(y) when zs is empty.
double conditional_entropy(const std::vector<double>& y,
                           const std::vector<std::vector<double>>& zs, const BinSpec& bins = {});

// H(y | prefix) - H(y | prefix + z_new), always >= 0 for plug-in estimates.
double information_gain(const std::vector<double>& y,
                        const std::vector<std::vector<double>>& prefix,
                        const std::vector<double>& z_new, const BinSpec& bins = {});

struct OrderingTrace {
    // h[k-1] = H(y | first k proxies), k = 1..P.
    std::vector<double> h;
    // Selected proxy per step (greedy) or per-k best subset (exhaustive).
    std::vector<std::vector<std::string>> chosen;
};

struct TableColumns {
    std::vector<double> y;
    std::vector<std::string> proxy_ids;
    std::vector<std::vector<double>> z;  // one column per proxy; NaN = invalid
};
TableColumns table_columns(const ScoreTable& table);

OrderingTrace ordering_random(const ScoreTable& table, int trials, uint64_t seed,
                              const BinSpec& bins = {});
OrderingTrace ordering_greedy(const ScoreTable& table, const BinSpec& bins = {});
// Per-k minimum over all subsets of size k (may not form a nested ordering).
OrderingTrace ordering_exhaustive(const ScoreTable& table, int k_max, const BinSpec& bins = {});

struct Matrix {
    std::vector<std::string> row_names;
    std::vector<std::string> col_names;
    std::vector<std::vector<double>> values;  // NaN = missing
};

// Spearman(proxy, val_acc) per (proxy, benchmark) over a seeded sample of
// min(1000, M) rows; rows sorted by row mean.
Matrix generalization_matrix(const std::vector<ScoreTable>& tables, uint64_t seed = 0);

// Mean per-proxy Pearson between benchmark pairs, aligned by arch id when
// spaces overlap, by per-proxy generalization scores otherwise.
Matrix cross_benchmark_correlation(const std::vector<ScoreTable>& tables);

// Ranking-metric variants of the generalization matrix.
Matrix precision_matrix(const std::vector<ScoreTable>& tables, int k, uint64_t seed = 0);
Matrix best_ranking_matrix(const std::vector<ScoreTable>& tables, int k, uint64_t seed = 0);

struct EntropyReport {
    double h_y = 0.0;
    int n_bins = 0;
    long sample_size = 0;
    std::vector<std::string> proxy_ids;
    std::vector<double> h_y_given_z;       // per proxy
    std::vector<double> info_gain;         // per proxy, from empty prefix
    std::vector<std::vector<double>> ig_pairs;  // ig_pairs[i][j] = IG(z_j | z_i)
};
EntropyReport entropy_report(const ScoreTable& table, const BinSpec& bins = {});

// Two-sided Mann-Whitney rank-sum p-value (normal approximation with tie
// correction); used as an equivalence check between search traces.
double rank_sum_p(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace zcgauge::analysis
