// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include "zcgauge/biaslab.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace zcgauge::bias {

namespace {

constexpr double kSingular = 1e-9;

std::vector<double> proxy_values(const ScoreTable& table, const std::string& proxy_id) {
    std::vector<double> out;
    out.reserve(table.rows.size());
    for (const Row& r : table.rows) {
        if (proxy_id == "val_acc") {
            out.push_back(r.val_acc);
            continue;
        }
        auto it = r.scores.find(proxy_id);
        if (it == r.scores.end())
            throw std::runtime_error("proxy id not found: '" + proxy_id + "'");
        out.push_back(it->second.valid ? it->second.score : 0.0);
    }
    return out;
}

}  // namespace

const std::vector<std::string>& bias_metric_names() {
    static const std::vector<std::string> names = {"conv_pool", "cell_size", "num_skip",
                                                   "num_params"};
    return names;
}

BiasMetric parse_bias_metric(const std::string& name) {
    if (name == "conv_pool") return BiasMetric::ConvPool;
    if (name == "cell_size") return BiasMetric::CellSize;
    if (name == "num_skip") return BiasMetric::NumSkip;
    if (name == "num_params") return BiasMetric::NumParams;
    throw std::invalid_argument("unknown bias metric '" + name + "'");
}

std::vector<double> metric_values(const ScoreTable& table, BiasMetric metric) {
    std::vector<double> out;
    out.reserve(table.rows.size());
    NetworkSpec spec;
    for (const Row& r : table.rows) {
        if (r.encoding.empty())
            throw std::runtime_error("bias metric requires encodings (row '" + r.id + "')");
        const ArchFeatures f = features_analytic(CellEncoding::parse(r.encoding), spec);
        switch (metric) {
            case BiasMetric::ConvPool: out.push_back(f.conv_pool_ratio); break;
            case BiasMetric::CellSize: out.push_back(f.cell_size); break;
            case BiasMetric::NumSkip: out.push_back(f.num_skip); break;
            case BiasMetric::NumParams: out.push_back(static_cast<double>(f.num_params)); break;
        }
    }
    return out;
}

double bias(const ScoreTable& table, const std::string& proxy_id, BiasMetric metric) {
    return analysis::pearson(proxy_values(table, proxy_id), metric_values(table, metric));
}

double mitigated_score(double f, double b, double c) { return f / (b + c); }

Strategy parse_strategy(const std::string& name) {
    if (name == "minimize") return Strategy::Minimize;
    if (name == "equalize") return Strategy::Equalize;
    if (name == "performance") return Strategy::Performance;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

MitigationResult mitigate(const ScoreTable& table, const std::string& proxy_id, BiasMetric metric,
                          Strategy strategy, const Grid& grid) {
    const std::vector<double> f = proxy_values(table, proxy_id);
    const std::vector<double> b = metric_values(table, metric);
    std::vector<double> acc;
    acc.reserve(table.rows.size());
    for (const Row& r : table.rows) acc.push_back(r.val_acc);

    MitigationResult res;
    res.proxy_id = proxy_id;
    res.metric = metric;
    res.strategy = strategy;
    res.original_bias = analysis::pearson(f, b);
    res.original_perf = analysis::pearson(f, acc);
    const double target_bias =
        strategy == Strategy::Equalize ? analysis::pearson(acc, b) : 0.0;

    auto objective = [&](double cand_bias, double cand_perf) {
        switch (strategy) {
            case Strategy::Minimize: return std::abs(cand_bias);
            case Strategy::Equalize: return std::abs(cand_bias - target_bias);
            case Strategy::Performance: return -cand_perf;
        }
        return 0.0;
    };

    bool found = false;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<double> fprime(f.size());

    auto consider = [&](double c, bool infinite) {
        if (!infinite) {
            for (size_t i = 0; i < f.size(); ++i) {
                const double denom = b[i] + c;
                if (std::abs(denom) < kSingular) return;  // skip singular candidate
                fprime[i] = mitigated_score(f[i], b[i], c);
            }
        }
        const std::vector<double>& fv = infinite ? f : fprime;
        double cand_bias, cand_perf;
        try {
            cand_bias = analysis::pearson(fv, b);
            cand_perf = analysis::pearson(fv, acc);
        } catch (const std::exception&) {
            return;
        }
        const double obj = objective(cand_bias, cand_perf);
        // Ties break toward larger C; candidates are visited in increasing
        // C order with the infinite sentinel last.
        if (obj <= best_obj) {
            best_obj = obj;
            res.c = c;
            res.c_is_infinite = infinite;
            res.new_bias = cand_bias;
            res.new_perf = cand_perf;
            found = true;
        }
    };

    for (int j = 0; j < grid.steps; ++j) {
        const double c = grid.lo + (grid.hi - grid.lo) * j / (grid.steps - 1);
        consider(c, false);
    }
    consider(std::numeric_limits<double>::infinity(), true);

    if (!found) throw std::runtime_error("mitigate: all candidates singular");
    return res;
}

analysis::Matrix bias_report(const ScoreTable& table) {
    analysis::Matrix m;
    m.row_names = proxy_catalog();
    m.row_names.push_back("val_acc");
    m.col_names = bias_metric_names();
    m.values.assign(m.row_names.size(),
                    std::vector<double>(m.col_names.size(),
                                        std::numeric_limits<double>::quiet_NaN()));
    for (size_t c = 0; c < m.col_names.size(); ++c) {
        const BiasMetric metric = parse_bias_metric(m.col_names[c]);
        for (size_t r = 0; r < m.row_names.size(); ++r) {
            try {
                m.values[r][c] = bias(table, m.row_names[r], metric);
            } catch (const std::exception&) {
                // missing encodings, absent proxy, or constant column
            }
        }
    }
    return m;
}

}  // namespace zcgauge::bias
