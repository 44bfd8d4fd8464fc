// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include "zcgauge/nasloop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "zcgauge/analysis.hpp"

namespace zcgauge::nas {

FeatureSet parse_feature_set(const std::string& name) {
    if (name == "encoding") return FeatureSet::Encoding;
    if (name == "zc") return FeatureSet::Zc;
    if (name == "both") return FeatureSet::Both;
    throw std::invalid_argument("unknown feature set '" + name + "'");
}

void Normalizer::fit(const std::vector<const Row*>& rows) {
    const auto& catalog = proxy_catalog();
    sorted_.assign(catalog.size(), {});
    for (size_t p = 0; p < catalog.size(); ++p) {
        for (const Row* r : rows) {
            auto it = r->scores.find(catalog[p]);
            if (it != r->scores.end() && it->second.valid && std::isfinite(it->second.score))
                sorted_[p].push_back(it->second.score);
        }
        std::sort(sorted_[p].begin(), sorted_[p].end());
    }
    fitted_ = true;
}

double Normalizer::transform(size_t proxy_index, const ProxyResult* r) const {
    if (!fitted_) throw std::logic_error("normalizer: transform before fit");
    const auto& vals = sorted_[proxy_index];
    if (!r || !r->valid || !std::isfinite(r->score) || vals.empty())
        return 0.5;  // training-median imputation
    const double v = r->score;
    const auto lo = std::lower_bound(vals.begin(), vals.end(), v);
    const auto hi = std::upper_bound(vals.begin(), vals.end(), v);
    const double below = static_cast<double>(lo - vals.begin());
    const double equal = static_cast<double>(hi - lo);
    return (below + 0.5 * equal) / static_cast<double>(vals.size());
}

Eigen::RowVectorXd featurize(const Row& row, FeatureSet fs, const Normalizer& norm) {
    std::vector<double> feats;
    if (fs == FeatureSet::Encoding || fs == FeatureSet::Both) {
        if (row.encoding.empty())
            throw std::invalid_argument("featurize: row '" + row.id + "' has no encoding");
        const CellEncoding enc = CellEncoding::parse(row.encoding);
        for (int e = 0; e < kNumEdges; ++e)
            for (int o = 0; o < kNumOps; ++o)
                feats.push_back(enc.ops[static_cast<size_t>(e)] == static_cast<CellOp>(o) ? 1.0
                                                                                          : 0.0);
    }
    if (fs == FeatureSet::Zc || fs == FeatureSet::Both) {
        if (row.scores.empty())
            throw std::invalid_argument("featurize: row '" + row.id + "' has no scores");
        const auto& catalog = proxy_catalog();
        for (size_t p = 0; p < catalog.size(); ++p) {
            auto it = row.scores.find(catalog[p]);
            feats.push_back(norm.transform(p, it == row.scores.end() ? nullptr : &it->second));
        }
    }
    Eigen::RowVectorXd out(static_cast<Eigen::Index>(feats.size()));
    for (size_t i = 0; i < feats.size(); ++i) out(static_cast<Eigen::Index>(i)) = feats[i];
    return out;
}

namespace {

Eigen::MatrixXd feature_matrix(const std::vector<const Row*>& rows, FeatureSet fs,
                               const Normalizer& norm) {
    if (rows.empty()) throw std::invalid_argument("feature_matrix: no rows");
    Eigen::RowVectorXd first = featurize(*rows[0], fs, norm);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), first.size());
    x.row(0) = first;
    for (size_t i = 1; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = featurize(*rows[i], fs, norm);
    return x;
}

}  // namespace

void Surrogate::fit(const std::vector<const Row*>& rows, FeatureSet fs, uint64_t) {
    if (rows.size() < 2) throw std::invalid_argument("surrogate: need >= 2 training rows");
    norm.fit(rows);
    Eigen::MatrixXd x = feature_matrix(rows, fs, norm);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i]->val_acc;
    model = Gbrt(params);
    model.fit(x, y);
}

Eigen::VectorXd Surrogate::predict(const std::vector<const Row*>& rows, FeatureSet fs) const {
    return model.predict(feature_matrix(rows, fs, norm));
}

EvalStats standalone_eval(const ScoreTable& table, FeatureSet fs, int n_train, int n_test,
                          int trials, uint64_t seed) {
    const size_t n = table.rows.size();
    if (n < static_cast<size_t>(n_train + n_test))
        throw std::invalid_argument("standalone_eval: table too small for disjoint samples");
    Rng rng(seed);
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::vector<double> scores;
    for (int t = 0; t < trials; ++t) {
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<const Row*> train, test;
        for (int i = 0; i < n_train; ++i) train.push_back(&table.rows[idx[static_cast<size_t>(i)]]);
        for (int i = n_train; i < n_train + n_test; ++i)
            test.push_back(&table.rows[idx[static_cast<size_t>(i)]]);
        Surrogate s;
        s.fit(train, fs, seed + static_cast<uint64_t>(t));
        const Eigen::VectorXd pred = s.predict(test, fs);
        analysis::RankedPair pair;
        for (size_t i = 0; i < test.size(); ++i) {
            pair.ground.push_back(test[i]->val_acc);
            pair.pred.push_back(pred(static_cast<Eigen::Index>(i)));
        }
        scores.push_back(analysis::spearman(pair));
    }
    EvalStats st;
    for (double s : scores) st.mean += s;
    st.mean /= static_cast<double>(scores.size());
    for (double s : scores) st.sd += (s - st.mean) * (s - st.mean);
    st.sd = scores.size() > 1 ? std::sqrt(st.sd / (static_cast<double>(scores.size()) - 1)) : 0.0;
    return st;
}

namespace {

struct LoopState {
    const ScoreTable& table;
    const SearchConfig& config;
    Rng rng;
    std::vector<const Row*> evaluated;
    std::set<std::string> evaluated_ids;
    std::map<std::string, const Row*> by_encoding;  // mutation lookup key
    SearchTrace trace;
    double sim_seconds = 0.0;

    explicit LoopState(const ScoreTable& t, const SearchConfig& c)
        : table(t), config(c), rng(c.seed) {
        trace.fs = c.fs;
        if (c.budget > static_cast<int>(t.rows.size()))
            throw std::invalid_argument("search budget exceeds table size");
        if (c.init > c.budget) throw std::invalid_argument("init exceeds budget");
        for (const Row& r : t.rows)
            if (!r.encoding.empty()) by_encoding.emplace(r.encoding, &r);
    }

    void consume_zc(const Row& row) {
        if (config.fs == FeatureSet::Encoding) return;
        if (!trace.zc_consumed.insert(row.id).second) return;
        for (const auto& [name, r] : row.scores) sim_seconds += r.seconds;
    }

    void evaluate(const Row& row) {
        evaluated.push_back(&row);
        evaluated_ids.insert(row.id);
        if (row.train_time)
            sim_seconds += *row.train_time;
        else
            trace.train_time_missing = true;
        consume_zc(row);
        TraceStep step;
        step.arch_id = row.id;
        step.val_acc = row.val_acc;
        step.best_so_far =
            trace.steps.empty() ? row.val_acc : std::max(trace.steps.back().best_so_far, row.val_acc);
        step.sim_seconds = sim_seconds;
        trace.steps.push_back(std::move(step));
    }

    const Row& random_unevaluated() {
        std::uniform_int_distribution<size_t> d(0, table.rows.size() - 1);
        while (true) {
            const Row& r = table.rows[d(rng)];
            if (!evaluated_ids.count(r.id)) return r;
        }
    }

    void init_random() {
        for (int i = 0; i < config.init; ++i) evaluate(random_unevaluated());
    }

    // Mutations of `parent` that exist in the table and are new this round.
    std::vector<const Row*> children_of(const Row& parent, int count,
                                        std::set<std::string>& seen) {
        std::vector<const Row*> out;
        const CellEncoding enc = CellEncoding::parse(parent.encoding);
        for (int attempt = 0; attempt < count * 4 && static_cast<int>(out.size()) < count;
             ++attempt) {
            const std::string child = mutate(enc, rng).to_string();
            auto it = by_encoding.find(child);
            if (it == by_encoding.end() || evaluated_ids.count(it->second->id) ||
                seen.count(child))
                continue;
            seen.insert(child);
            out.push_back(it->second);
        }
        return out;
    }
};

}  // namespace

SearchTrace run_bananas(const ScoreTable& table, const SearchConfig& config) {
    constexpr int kEnsemble = 5;
    constexpr double kKappa = 1.0;
    LoopState st(table, config);
    st.init_random();

    while (static_cast<int>(st.evaluated.size()) < config.budget) {
        // Ensemble of bootstrap-fitted surrogates.
        std::vector<Surrogate> ensemble(kEnsemble);
        for (int e = 0; e < kEnsemble; ++e) {
            std::vector<const Row*> boot;
            std::uniform_int_distribution<size_t> d(0, st.evaluated.size() - 1);
            for (size_t i = 0; i < st.evaluated.size(); ++i) boot.push_back(st.evaluated[d(st.rng)]);
            for (const Row* r : boot) st.consume_zc(*r);
            ensemble[static_cast<size_t>(e)].fit(boot, config.fs, config.seed);
        }

        // Candidates: mutations of the current top-10 evaluated archs.
        std::vector<const Row*> top(st.evaluated);
        std::sort(top.begin(), top.end(), [](const Row* a, const Row* b) {
            if (a->val_acc != b->val_acc) return a->val_acc > b->val_acc;
            return a->id < b->id;
        });
        top.resize(std::min<size_t>(top.size(), 10));
        const int per_parent = std::max(1, config.candidates / static_cast<int>(top.size()));
        std::set<std::string> seen;
        std::vector<const Row*> candidates;
        for (const Row* parent : top) {
            auto kids = st.children_of(*parent, per_parent, seen);
            candidates.insert(candidates.end(), kids.begin(), kids.end());
        }
        if (candidates.empty()) {
            st.evaluate(st.random_unevaluated());
            continue;
        }
        for (const Row* c : candidates) st.consume_zc(*c);

        // Acquisition: predicted value plus exploration bonus.
        Eigen::MatrixXd preds(static_cast<Eigen::Index>(candidates.size()), kEnsemble);
        for (int e = 0; e < kEnsemble; ++e)
            preds.col(e) = ensemble[static_cast<size_t>(e)].predict(candidates, config.fs);
        int best = 0;
        double best_acq = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < preds.rows(); ++i) {
            const double mean = preds.row(i).mean();
            const double var = (preds.row(i).array() - mean).square().mean();
            const double acq = mean + kKappa * std::sqrt(var);
            if (acq > best_acq) {
                best_acq = acq;
                best = static_cast<int>(i);
            }
        }
        st.evaluate(*candidates[static_cast<size_t>(best)]);
    }
    return st.trace;
}

SearchTrace run_npenas(const ScoreTable& table, const SearchConfig& config) {
    constexpr int kPopulation = 20;
    constexpr int kTournament = 5;
    LoopState st(table, config);
    st.init_random();

    while (static_cast<int>(st.evaluated.size()) < config.budget) {
        // Population: most recent evaluations; tournament on val_acc.
        const size_t pop_lo = st.evaluated.size() > kPopulation
                                  ? st.evaluated.size() - kPopulation
                                  : 0;
        std::uniform_int_distribution<size_t> d(pop_lo, st.evaluated.size() - 1);
        const Row* parent = st.evaluated[d(st.rng)];
        for (int t = 1; t < kTournament; ++t) {
            const Row* other = st.evaluated[d(st.rng)];
            if (other->val_acc > parent->val_acc) parent = other;
        }

        std::set<std::string> seen;
        std::vector<const Row*> children = st.children_of(*parent, config.candidates, seen);
        if (children.empty()) {
            st.evaluate(st.random_unevaluated());
            continue;
        }
        for (const Row* c : children) st.consume_zc(*c);

        Surrogate s;
        for (const Row* r : st.evaluated) st.consume_zc(*r);
        s.fit(st.evaluated, config.fs, config.seed);
        const Eigen::VectorXd pred = s.predict(children, config.fs);
        Eigen::Index best;
        pred.maxCoeff(&best);
        st.evaluate(*children[static_cast<size_t>(best)]);
    }
    return st.trace;
}

RuntimeReport simulated_runtime(const SearchTrace& trace, const ScoreTable& table) {
    RuntimeReport rep;
    for (const TraceStep& step : trace.steps) {
        const Row& row = table.row(step.arch_id);
        if (row.train_time)
            rep.seconds += *row.train_time;
        else
            rep.train_time_missing = true;
    }
    for (const std::string& id : trace.zc_consumed) {
        const Row& row = table.row(id);
        for (const auto& [name, r] : row.scores) rep.seconds += r.seconds;
    }
    return rep;
}

}  // namespace zcgauge::nas
