// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <string>
#include <vector>

#include "zcgauge/analysis.hpp"
#include "zcgauge/scorestore.hpp"

namespace zcgauge::bias {

enum class BiasMetric { ConvPool, CellSize, NumSkip, NumParams };

const std::vector<std::string>& bias_metric_names();
BiasMetric parse_bias_metric(const std::string& name);

// Bias metric values per row; requires parseable encodings.
std::vector<double> metric_values(const ScoreTable& table, BiasMetric metric);

// Pearson(proxy score, metric value) over all rows. proxy_id may be
// "val_acc" to measure the ground truth's own bias.
double bias(const ScoreTable& table, const std::string& proxy_id, BiasMetric metric);

// Mitigated score f'(a) = f(a) / (b(a) + C).
double mitigated_score(double f, double b, double c);

enum class Strategy { Minimize, Equalize, Performance };
Strategy parse_strategy(const std::string& name);

struct Grid {
    double lo = -10.0;
    double hi = 1000.0;
    int steps = 10000;
};

struct MitigationResult {
    std::string proxy_id;
    BiasMetric metric;
    Strategy strategy;
    double c = 0.0;          // selected constant; infinity = "no mitigation"
    bool c_is_infinite = false;
    double original_bias = 0.0;
    double new_bias = 0.0;
    double original_perf = 0.0;
    double new_perf = 0.0;
};

// Brute-force grid search of C in f'(a) = f(a) / (b(a) + C). The candidate
// set always includes the no-mitigation sentinel; ties break toward larger C.
MitigationResult mitigate(const ScoreTable& table, const std::string& proxy_id, BiasMetric metric,
                          Strategy strategy, const Grid& grid = {});

// Proxies x metrics Pearson matrix plus the val_acc row; NaN = inapplicable.
analysis::Matrix bias_report(const ScoreTable& table);

}  // namespace zcgauge::bias
