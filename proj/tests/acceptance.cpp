// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.
//
// Release gate: one self-contained check per shipping criterion, each printed
// as a single [PASS]/[FAIL] line. Exit status is the number of failures.
// Oracles here are independent re-derivations (brute force, symbolic, finite
// differences), never calls back into the code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "zcgauge/analysis.hpp"
#include "zcgauge/archspace.hpp"
#include "zcgauge/biaslab.hpp"
#include "zcgauge/nasloop.hpp"
#include "zcgauge/proxies.hpp"
#include "zcgauge/scorestore.hpp"

using namespace zcgauge;
namespace za = zcgauge::analysis;
namespace zb = zcgauge::bias;
namespace zn = zcgauge::nas;

namespace {

int g_failed = 0;

struct Check {
    bool ok = false;
    std::string note;
};

template <typename F>
void criterion(int n, const char* name, F f) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        c = f();
    } catch (const std::exception& e) {
        c = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d (%s): %s [%.1fs]\n", c.ok ? "PASS" : "FAIL", n, name,
                c.note.c_str(), secs);
    std::fflush(stdout);
    if (!c.ok) ++g_failed;
}

// ---------------------------------------------------------------------------
// 1. Histogram bin count at the reference sample size.

Check c1_sturges() {
    const int bins = za::sturges_bins(1000);
    return {bins == 24, "sturges_bins(1000) = " + std::to_string(bins) + ", want 24"};
}

// ---------------------------------------------------------------------------
// 2. Plug-in entropy invariants on 500 random cases.

Check c2_entropy_invariants() {
    Rng rng(2024);
    std::normal_distribution<double> gauss;
    const int n = 200;
    const int n_bins = za::sturges_bins(n);
    const double h_max = std::log2(static_cast<double>(n_bins));
    int cases = 0;
    for (int c = 0; c < 500; ++c) {
        std::vector<double> y(n);
        std::vector<std::vector<double>> z(4, std::vector<double>(n));
        for (int i = 0; i < n; ++i) {
            y[i] = gauss(rng);
            for (int p = 0; p < 4; ++p) z[p][i] = 0.4 * y[i] * p + gauss(rng);
        }
        // Random subset chain S ⊂ T over a shuffled proxy order.
        std::vector<int> order = {0, 1, 2, 3};
        std::shuffle(order.begin(), order.end(), rng);
        std::uniform_int_distribution<int> size_t_(2, 4);
        const int t_size = size_t_(rng);
        std::uniform_int_distribution<int> size_s(1, t_size - 1);
        const int s_size = size_s(rng);
        std::vector<std::vector<double>> zs, zt;
        for (int i = 0; i < t_size; ++i) {
            zt.push_back(z[static_cast<size_t>(order[static_cast<size_t>(i)])]);
            if (i < s_size) zs.push_back(zt.back());
        }
        const double hy = za::conditional_entropy(y, {});
        const double hs = za::conditional_entropy(y, zs);
        const double ht = za::conditional_entropy(y, zt);
        if (!(0.0 <= ht && ht <= hs + 1e-12 && hs <= hy + 1e-12 && hy <= h_max + 1e-12))
            return {false, "chain violated at case " + std::to_string(c)};
        if (za::information_gain(y, zs, zt[0]) < 0.0)
            return {false, "negative information gain at case " + std::to_string(c)};
        if (za::information_gain(y, {z[0]}, z[0]) != 0.0)
            return {false, "nonzero diagonal gain at case " + std::to_string(c)};
        ++cases;
    }
    return {cases == 500, std::to_string(cases) + "/500 random chain cases hold"};
}

// ---------------------------------------------------------------------------
// 3. Ordering dominance: exhaustive <= greedy <= random-mean per k.

Check c3_ordering_dominance() {
    for (int t = 0; t < 20; ++t) {
        SyntheticSpec spec;
        spec.n_archs = 120;
        ScoreTable table = generate_synthetic(spec, 100 + static_cast<uint64_t>(t));
        const za::OrderingTrace ex = za::ordering_exhaustive(table, 13);
        const za::OrderingTrace gr = za::ordering_greedy(table);
        const za::OrderingTrace rnd = za::ordering_random(table, 10, static_cast<uint64_t>(t));
        for (size_t k = 0; k < 13; ++k) {
            if (!(ex.h[k] <= gr.h[k] + 1e-12 && gr.h[k] <= rnd.h[k] + 1e-12))
                return {false, "dominance violated at table " + std::to_string(t) + ", k=" +
                                   std::to_string(k + 1)};
        }
        if (gr.h[0] != ex.h[0])
            return {false, "greedy != exhaustive at k=1 on table " + std::to_string(t)};
    }
    return {true, "20 tables, all k in 1..13"};
}

// ---------------------------------------------------------------------------
// 4. Ranking metrics vs brute-force reference implementations.

std::vector<int> brute_strict_ranks(const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return v[a] > v[b]; });
    std::vector<int> r(v.size());
    for (size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<int>(i);
    return r;
}

std::vector<double> brute_avg_ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        double below = 0, equal = 0;
        for (size_t j = 0; j < v.size(); ++j) {
            if (v[j] > v[i]) ++below;
            if (v[j] == v[i]) ++equal;
        }
        r[i] = below + (equal - 1) / 2.0;
    }
    return r;
}

double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double brute_spearman(const std::vector<double>& g, const std::vector<double>& p) {
    return brute_pearson(brute_avg_ranks(g), brute_avg_ranks(p));
}

double brute_precision(const std::vector<double>& g, const std::vector<double>& p, int k) {
    const auto gr = brute_strict_ranks(g), pr = brute_strict_ranks(p);
    int hits = 0;
    for (size_t i = 0; i < g.size(); ++i)
        if (gr[i] < k && pr[i] < k) ++hits;
    return static_cast<double>(hits) / k;
}

double brute_best_ranking(const std::vector<double>& g, const std::vector<double>& p, int k) {
    const auto gr = brute_strict_ranks(g), pr = brute_strict_ranks(p);
    int best = static_cast<int>(g.size());
    for (size_t i = 0; i < g.size(); ++i)
        if (pr[i] < k) best = std::min(best, gr[i]);
    return static_cast<double>(best) / static_cast<double>(g.size());
}

Check c4_ranking_oracle() {
    long cases = 0;
    // All permutations at M = 2..6.
    for (int m = 2; m <= 6; ++m) {
        std::vector<double> ground(static_cast<size_t>(m));
        std::vector<double> pred(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
            ground[static_cast<size_t>(i)] = m - i;
            pred[static_cast<size_t>(i)] = i + 1;
        }
        std::sort(pred.begin(), pred.end());
        do {
            const za::RankedPair pair{ground, pred};
            if (std::abs(za::spearman(pair) - brute_spearman(ground, pred)) > 1e-12)
                return {false, "spearman mismatch at M=" + std::to_string(m)};
            for (int k = 1; k <= m; ++k) {
                if (za::precision_at_k(pair, k) != brute_precision(ground, pred, k))
                    return {false, "precision mismatch at M=" + std::to_string(m)};
                if (za::best_ranking_at_k(pair, k) != brute_best_ranking(ground, pred, k))
                    return {false, "best-ranking mismatch at M=" + std::to_string(m)};
            }
            ++cases;
        } while (std::next_permutation(pred.begin(), pred.end()));
    }
    // 1000 random cases at M = 50 (distinct values; strict ranks well defined).
    Rng rng(4);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> pick_k(1, 50);
    for (int c = 0; c < 1000; ++c) {
        std::vector<double> g(50), p(50);
        for (size_t i = 0; i < g.size(); ++i) {
            g[i] = gauss(rng) + 1e-9 * static_cast<double>(i);
            p[i] = 0.5 * g[i] + gauss(rng) + 1e-9 * static_cast<double>(i);
        }
        const za::RankedPair pair{g, p};
        const int k = pick_k(rng);
        if (std::abs(za::spearman(pair) - brute_spearman(g, p)) > 1e-12)
            return {false, "spearman mismatch at random case " + std::to_string(c)};
        if (za::precision_at_k(pair, k) != brute_precision(g, p, k))
            return {false, "precision mismatch at random case " + std::to_string(c)};
        if (za::best_ranking_at_k(pair, k) != brute_best_ranking(g, p, k))
            return {false, "best-ranking mismatch at random case " + std::to_string(c)};
        ++cases;
    }
    return {true, std::to_string(cases) + " oracle cases (all permutations M<=6 + 1000 random)"};
}

// ---------------------------------------------------------------------------
// 5. Proxy oracles: hand counts, symbolic chains, dense re-derivations, FD.

Graph chain_graph(const std::vector<double>& weights) {
    Graph g;
    int prev = g.add_node({NodeOp::Input, {}});
    Rng rng(0);
    for (size_t i = 0; i < weights.size(); ++i) {
        const std::string wn = "w" + std::to_string(i), bn = "b" + std::to_string(i);
        g.add_param(wn, {1, 1}, rng, 0).data[0] = weights[i];
        g.add_param(bn, {1}, rng, 0);
        prev = g.add_node({NodeOp::Dense, {prev}, wn, bn, "", 0, 1, 1});
    }
    g.output = prev;
    return g;
}

double symbolic_chain_synflow(const std::vector<double>& weights) {
    double score = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        double deriv = 1.0;
        for (size_t j = 0; j < weights.size(); ++j)
            if (j != i) deriv *= std::abs(weights[j]);
        score += std::abs(weights[i]) * deriv;
    }
    return score;
}

Check c5_proxy_oracles() {
    // Hand counts on 5 fixed cells (stem 232 + head 90 = 322 baseline;
    // conv3x3 edge 592 params / 36864 MACs, conv1x1 edge 80 / 4096).
    NetworkSpec spec;
    Minibatch unused;
    struct Fixed {
        CellOp fill;
        int conv3 = 0, conv1 = 0;
        double params, flops;
    };
    auto cell = [](CellOp fill, std::vector<std::pair<int, CellOp>> edits) {
        CellEncoding e;
        for (auto& o : e.ops) o = fill;
        for (auto [i, op] : edits) e.ops[static_cast<size_t>(i)] = op;
        return e;
    };
    const std::vector<std::pair<CellEncoding, std::pair<double, double>>> fixed = {
        {cell(CellOp::Zero, {}), {322, 13904}},
        {cell(CellOp::Skip, {}), {322, 13904}},
        {cell(CellOp::Zero, {{0, CellOp::Conv3x3}}), {322 + 592, 13904 + 36864}},
        {cell(CellOp::Zero, {{0, CellOp::Conv1x1}}), {322 + 80, 13904 + 4096}},
        {cell(CellOp::Conv3x3, {}), {322 + 6 * 592, 13904.0 + 6 * 36864}},
    };
    for (size_t i = 0; i < fixed.size(); ++i) {
        const Graph g = build_network(fixed[i].first, spec, 0);
        if (proxy_params(g).score != fixed[i].second.first)
            return {false, "params mismatch on fixed cell " + std::to_string(i)};
        if (proxy_flops(g, unused).score != fixed[i].second.second)
            return {false, "flops mismatch on fixed cell " + std::to_string(i)};
    }

    // Symbolic product-rule chains, length 2..4.
    for (const std::vector<double>& w :
         {std::vector<double>{0.5, 3.0}, {1.5, 0.25, 4.0}, {2.0, 0.5, 1.25, 0.8}}) {
        const double got = proxy_synflow(chain_graph(w)).score;
        const double want = symbolic_chain_synflow(w);
        if (std::abs(got - want) / want > 1e-9)
            return {false, "synflow chain mismatch (len " + std::to_string(w.size()) + ")"};
    }

    NetworkSpec tiny;
    tiny.stem_channels = 4;
    tiny.resolution = 4;
    tiny.classes = 3;

    // Dense finite-difference Jacobian oracle for jacov.
    {
        const Graph g = build_network(CellEncoding::from_index(9282), tiny, 6);
        if (g.param_count() > 500) return {false, "jacov oracle net too large"};
        const Minibatch mb = synthetic_minibatch(6, 3, 4, 3, 41);
        const double got = proxy_jacov(g, mb).score;
        const int B = mb.inputs.shape[0];
        const Eigen::Index per = mb.inputs.size() / B;
        Eigen::MatrixXd J(B, per);
        const double eps = 1e-5;
        for (Eigen::Index i = 0; i < mb.inputs.size(); ++i) {
            Tensor xp = mb.inputs, xm = mb.inputs;
            xp.data[i] += eps;
            xm.data[i] -= eps;
            const Array op = forward(g, xp).data, om = forward(g, xm).data;
            const int b = static_cast<int>(i / per);
            const Eigen::Index K = op.size() / B;
            J(b, i % per) = (op.segment(b * K, K) - om.segment(b * K, K)).sum() / (2 * eps);
        }
        const Eigen::VectorXd rm = J.rowwise().mean();
        const Eigen::MatrixXd rc = J.colwise() - rm;
        const Eigen::VectorXd sd = rc.rowwise().norm();
        Eigen::MatrixXd corr(B, B);
        for (int i = 0; i < B; ++i)
            for (int j = 0; j < B; ++j) corr(i, j) = rc.row(i).dot(rc.row(j)) / (sd(i) * sd(j));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
        double want = 0.0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double lam = es.eigenvalues()(i);
            want -= std::log(lam + 1e-5) + 1.0 / (lam + 1e-5);
        }
        if (std::abs(got - want) / std::abs(want) > 1e-6)
            return {false, "jacov dense-oracle mismatch"};
    }

    // Explicit pairwise agreement kernel oracle for nwot.
    {
        const Graph g = build_network(CellEncoding::from_index(777), tiny, 8);
        if (g.param_count() > 500) return {false, "nwot oracle net too large"};
        const Minibatch mb = synthetic_minibatch(6, 3, 4, 3, 59);
        const double got = proxy_nwot(g, mb).score;
        Session s(g);
        s.run(mb.inputs);
        const int B = 6;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(B, B);
        for (int node : s.relu_nodes()) {
            const Tensor& a = s.activation(node)->value;
            const Eigen::Index per = a.size() / B;
            for (int i = 0; i < B; ++i)
                for (int j = 0; j < B; ++j) {
                    int agree = 0;
                    for (Eigen::Index p = 0; p < per; ++p)
                        if ((a.data[i * per + p] > 0.0) == (a.data[j * per + p] > 0.0)) ++agree;
                    K(i, j) += agree;
                }
        }
        const double want = std::log(std::abs(K.determinant()));
        if (std::abs(got - want) / std::abs(want) > 1e-6)
            return {false, "nwot kernel-oracle mismatch"};
    }

    // Central finite differences on a smooth scalar loss, 5 nets x 5 coords.
    {
        NetworkSpec fd_spec;
        fd_spec.stem_channels = 3;
        fd_spec.resolution = 4;
        fd_spec.classes = 3;
        auto loss_at = [](const Graph& g, const Tensor& input) {
            Session s(g);
            auto out = s.run(input);
            return out->value.data.square().sum();
        };
        for (uint64_t seed = 0; seed < 5; ++seed) {
            const CellEncoding enc =
                CellEncoding::from_index(static_cast<long>(7919 * (seed + 1)) % kSpaceSize);
            Graph g = build_network(enc, fd_spec, seed);
            Tensor input({2, 3, 4, 4});
            Rng rng(seed + 100);
            std::normal_distribution<double> gauss;
            for (Eigen::Index i = 0; i < input.size(); ++i) input.data[i] = gauss(rng);
            Session s(g);
            auto out = s.run(input);
            const GradientTape tape = s.backward(ad::sum_all(ad::mul(out, out)));
            std::vector<std::string> names;
            for (const auto& [name, t] : g.params) names.push_back(name);
            std::uniform_int_distribution<size_t> pick(0, names.size() - 1);
            for (int c = 0; c < 5; ++c) {
                const std::string& name = names[pick(rng)];
                Tensor& w = g.params.at(name);
                std::uniform_int_distribution<Eigen::Index> coord(0, w.size() - 1);
                const Eigen::Index i = coord(rng);
                const double eps = 1e-4 * std::max(1.0, std::abs(w.data[i]));
                const double orig = w.data[i];
                w.data[i] = orig + eps;
                const double lp = loss_at(g, input);
                w.data[i] = orig - eps;
                const double lm = loss_at(g, input);
                w.data[i] = orig;
                const double fd = (lp - lm) / (2 * eps);
                const double an = tape.param_grads.at(name).data[i];
                const double scale = std::max({1e-6, std::abs(fd), std::abs(an)});
                if (std::abs(fd - an) / scale > 1e-5)
                    return {false, "gradient FD mismatch (seed " + std::to_string(seed) + ")"};
            }
        }
    }
    return {true, "5 fixed cells exact; chains 1e-9; jacov/nwot 1e-6; gradients FD 1e-5"};
}

// ---------------------------------------------------------------------------
// 6. Bias mitigation strategy guarantees plus the point identity.

Check c6_bias_mitigation() {
    if (zb::mitigated_score(10.0, 4.0, 1.0) != 2.0)
        return {false, "point check 10/(4+1) != 2.0"};
    SyntheticSpec spec;
    spec.n_archs = 400;
    spec.fidelity = {{"synflow", 0.9}, {"plain", 0.0}, {"snip", 0.6}};
    const ScoreTable t = generate_synthetic(spec, 5);
    for (const std::string proxy : {"synflow", "snip", "plain"}) {
        for (const zb::BiasMetric metric : {zb::BiasMetric::CellSize, zb::BiasMetric::ConvPool}) {
            const zb::MitigationResult mn =
                zb::mitigate(t, proxy, metric, zb::Strategy::Minimize);
            if (std::abs(mn.new_bias) > std::abs(mn.original_bias) + 1e-12)
                return {false, "minimize raised |bias| for " + proxy};
            const zb::MitigationResult pf =
                zb::mitigate(t, proxy, metric, zb::Strategy::Performance);
            if (pf.new_perf < pf.original_perf - 1e-12)
                return {false, "performance lowered perf for " + proxy};
        }
    }
    std::string note = "guarantees hold on 6 (proxy, metric) pairs; 10/(4+1)=2.0";
    // Optional dataset-gated reproduction against a released benchmark table.
    if (const char* path = std::getenv("ZCGAUGE_NB201_CF100"); path != nullptr) {
        const ScoreTable real = import_external(path, "naslib");
        const zb::MitigationResult r =
            zb::mitigate(real, "synflow", zb::BiasMetric::CellSize, zb::Strategy::Performance);
        const bool ok = std::abs(std::abs(r.original_bias) - 0.57) <= 0.02 &&
                        std::abs(std::abs(r.new_bias) - 0.35) <= 0.02 &&
                        std::abs(r.original_perf - 0.68) <= 0.02 &&
                        std::abs(r.new_perf - 0.71) <= 0.02;
        if (!ok) return {false, "released-table synflow row outside +/-0.02"};
        note += "; released-table synflow row within +/-0.02";
    } else {
        note += "; released-table check skipped (ZCGAUGE_NB201_CF100 unset)";
    }
    return {true, note};
}

// ---------------------------------------------------------------------------
// 7. Surrogate improvement: proxy features beat encoding by >= 20% relative.

Check c7_surrogate_improvement() {
    SyntheticSpec spec;
    spec.n_archs = 1500;
    spec.noise_sd = 0.1;
    for (const auto& p : proxy_catalog()) spec.fidelity[p] = 0.0;
    ScoreTable t = generate_synthetic(spec, 7);
    // Ground truth: noisy function of three proxies plus the structural part.
    Rng rng(77);
    std::normal_distribution<double> gauss;
    for (Row& r : t.rows)
        r.val_acc = r.scores.at("snip").score + r.scores.at("nwot").score +
                    r.scores.at("fisher").score + 0.5 * r.val_acc + 0.15 * gauss(rng);
    const zn::EvalStats enc = zn::standalone_eval(t, zn::FeatureSet::Encoding, 100, 1000, 100, 1);
    const zn::EvalStats both = zn::standalone_eval(t, zn::FeatureSet::Both, 100, 1000, 100, 1);
    const double rel = (both.mean - enc.mean) / std::abs(enc.mean);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "encoding %.3f vs both %.3f over 100 trials: +%.1f%% relative (need >= 20%%)",
                  enc.mean, both.mean, 100 * rel);
    return {rel >= 0.20, buf};
}

// ---------------------------------------------------------------------------
// 8. NAS planted-optimum success rates plus the negative control.

ScoreTable planted_search_table(uint64_t seed) {
    SyntheticSpec spec;
    spec.n_archs = kSpaceSize;
    spec.noise_sd = 0.0;
    for (const auto& p : proxy_catalog()) spec.fidelity[p] = 0.0;
    spec.fidelity["nwot"] = 1.0;
    return generate_synthetic(spec, seed);
}

Check c8_nas_planted_optimum() {
    const ScoreTable t = planted_search_table(10);
    double best = -1e300;
    for (const Row& r : t.rows) best = std::max(best, r.val_acc);
    zn::SearchConfig cfg;
    cfg.budget = 50;
    cfg.init = 10;
    cfg.candidates = 50;
    cfg.fs = zn::FeatureSet::Zc;
    int hits_b = 0, hits_n = 0;
    for (uint64_t s = 0; s < 100; ++s) {
        cfg.seed = s;
        if (zn::run_bananas(t, cfg).steps.back().best_so_far == best) ++hits_b;
        if (zn::run_npenas(t, cfg).steps.back().best_so_far == best) ++hits_n;
    }

    // Negative control: unstructured ground truth, zero-fidelity proxies;
    // guided search must be statistically indistinguishable from random.
    SyntheticSpec null_spec;
    null_spec.n_archs = kSpaceSize;
    null_spec.noise_sd = 1.0;
    null_spec.feature_weights.clear();
    for (const auto& p : proxy_catalog()) null_spec.fidelity[p] = 0.0;
    const ScoreTable null_t = generate_synthetic(null_spec, 11);
    std::vector<double> guided, random_best;
    Rng rng(12);
    std::uniform_int_distribution<size_t> pick(0, null_t.rows.size() - 1);
    for (uint64_t s = 0; s < 40; ++s) {
        cfg.seed = s;
        guided.push_back(zn::run_bananas(null_t, cfg).steps.back().best_so_far);
        double rb = -1e300;
        std::set<size_t> seen;
        while (static_cast<int>(seen.size()) < cfg.budget) {
            const size_t i = pick(rng);
            if (seen.insert(i).second) rb = std::max(rb, null_t.rows[i].val_acc);
        }
        random_best.push_back(rb);
    }
    const double p = za::rank_sum_p(guided, random_best);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "bananas %d/100 (need >=90), npenas %d/100 (need >=85), null control p=%.3f "
                  "(need > 0.01)",
                  hits_b, hits_n, p);
    return {hits_b >= 90 && hits_n >= 85 && p > 0.01, buf};
}

// ---------------------------------------------------------------------------
// 9. Query latency on a full-size table.

Check c9_query_speed() {
    SyntheticSpec spec;
    spec.n_archs = kSpaceSize;
    const ScoreTable t = generate_synthetic(spec, 9);
    const auto& catalog = proxy_catalog();
    Rng rng(99);
    std::uniform_int_distribution<size_t> pick_row(0, t.rows.size() - 1);
    std::uniform_int_distribution<size_t> pick_proxy(0, catalog.size() - 1);
    const int n = 100000;
    std::vector<double> lat(static_cast<size_t>(n));
    double checksum = 0;
    for (int i = 0; i < n; ++i) {
        const std::string& id = t.rows[pick_row(rng)].id;
        const std::string& proxy = catalog[pick_proxy(rng)];
        const auto t0 = std::chrono::steady_clock::now();
        checksum += query(t, id, proxy).score;
        const auto t1 = std::chrono::steady_clock::now();
        lat[static_cast<size_t>(i)] = std::chrono::duration<double>(t1 - t0).count();
    }
    volatile double sink = checksum;  // keep the queries observable
    (void)sink;
    std::sort(lat.begin(), lat.end());
    const double p50 = lat[static_cast<size_t>(n / 2)];
    const double p99 = lat[static_cast<size_t>(n * 99 / 100)];
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "p50 %.2f us (need < 1 ms), p99 %.2f us (need < 10 ms) over 1e5 queries",
                  p50 * 1e6, p99 * 1e6);
    return {p50 < 1e-3 && p99 < 1e-2, buf};
}

// ---------------------------------------------------------------------------
// 10. Entry-count identity on the full desk compute run.

Check c10_full_table_counts() {
    std::string path;
    if (const char* env = std::getenv("ZCGAUGE_FULL_TABLE"); env != nullptr) path = env;
    if (path.empty()) {
        for (const char* cand : {"../full_desk_table.json", "full_desk_table.json",
                                 "build/full_desk_table.json"})
            if (std::filesystem::exists(cand)) {
                path = cand;
                break;
            }
    }
    ScoreTable t;
    if (!path.empty()) {
        t = load(path);
    } else {
        // No precomputed table: run the full desk-scale compute (slow path).
        path = "full_desk_table.json";
        t = compute_and_store(enumerate_space(), NetworkSpec{}, 0, path);
    }
    long entries = 0;
    for (const Row& r : t.rows) entries += static_cast<long>(r.scores.size());
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "%zu archs x 13 proxies = %ld entries (want 203125); x3 tasks = %ld "
                  "(want 609375) [%s]",
                  t.rows.size(), entries, 3 * entries, path.c_str());
    return {t.rows.size() == 15625 && entries == 203125 && 3 * entries == 609375, buf};
}

}  // namespace

int main() {
    criterion(1, "histogram bin count", c1_sturges);
    criterion(2, "entropy invariants", c2_entropy_invariants);
    criterion(3, "ordering dominance", c3_ordering_dominance);
    criterion(4, "ranking-metric oracle", c4_ranking_oracle);
    criterion(5, "proxy oracles", c5_proxy_oracles);
    criterion(6, "bias-mitigation guarantees", c6_bias_mitigation);
    criterion(7, "surrogate improvement", c7_surrogate_improvement);
    criterion(8, "NAS planted optimum", c8_nas_planted_optimum);
    criterion(9, "query latency", c9_query_speed);
    criterion(10, "full-table entry counts", c10_full_table_counts);
    std::printf("%d/10 criteria passed\n", 10 - g_failed);
    return g_failed;
}
