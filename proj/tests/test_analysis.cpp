// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "zcgauge/analysis.hpp"

using namespace zcgauge;
using namespace zcgauge::analysis;

namespace {

// Brute-force ranking metrics straight from the raw definitions: sort
// indices, assign 0-based ranks breaking ties by first occurrence, count.
std::vector<int> strict_ranks(const std::vector<double>& v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return v[a] > v[b]; });
    std::vector<int> r(v.size());
    for (size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<int>(i);
    return r;
}

double brute_precision(const std::vector<double>& g, const std::vector<double>& p, int k) {
    const auto gr = strict_ranks(g), pr = strict_ranks(p);
    int hits = 0;
    for (size_t i = 0; i < g.size(); ++i)
        if (gr[i] < k && pr[i] < k) ++hits;
    return static_cast<double>(hits) / k;
}

double brute_best_ranking(const std::vector<double>& g, const std::vector<double>& p, int k) {
    const auto gr = strict_ranks(g), pr = strict_ranks(p);
    int best = static_cast<int>(g.size());
    for (size_t i = 0; i < g.size(); ++i)
        if (pr[i] < k) best = std::min(best, gr[i]);
    return static_cast<double>(best) / static_cast<double>(g.size());
}

ScoreTable fake_table(const std::vector<std::string>& proxies,
                      const std::vector<double>& y,
                      const std::vector<std::vector<double>>& cols) {
    ScoreTable t;
    t.benchmark = "fake";
    t.proxy_ids = proxies;
    for (size_t i = 0; i < y.size(); ++i) {
        Row r;
        r.id = "a" + std::to_string(i);
        r.val_acc = y[i];
        for (size_t p = 0; p < proxies.size(); ++p) {
            ProxyResult pr;
            pr.name = proxies[p];
            pr.score = cols[p][i];
            pr.seconds = 1e-3;
            r.scores.emplace(proxies[p], pr);
        }
        t.rows.push_back(std::move(r));
    }
    t.build_index();
    return t;
}

}  // namespace

TEST_CASE("spearman: hand values") {
    CHECK(spearman({{1, 2, 3, 4}, {1, 2, 3, 4}}) == doctest::Approx(1.0));
    CHECK(spearman({{1, 2, 3, 4}, {4, 3, 2, 1}}) == doctest::Approx(-1.0));
    CHECK(spearman({{1, 2, 3, 4}, {1, 3, 2, 4}}) == doctest::Approx(0.8));
    CHECK_THROWS_AS(spearman({{1, 1, 1}, {1, 2, 3}}), std::invalid_argument);
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
    Rng rng(17);
    std::normal_distribution<double> gauss;
    for (int c = 0; c < 50; ++c) {
        std::vector<double> x(30), y(30);
        for (size_t i = 0; i < x.size(); ++i) {
            x[i] = gauss(rng);
            y[i] = 0.5 * x[i] + gauss(rng);
        }
        const double base = spearman({x, y});
        std::vector<double> xt(x.size()), yt(y.size());
        for (size_t i = 0; i < x.size(); ++i) {
            xt[i] = std::exp(x[i]);            // strictly increasing
            yt[i] = std::atan(y[i]) + 2 * y[i];
        }
        CHECK(spearman({xt, y}) == doctest::Approx(base));
        CHECK(spearman({x, yt}) == doctest::Approx(base));
    }
}

TEST_CASE("pearson: hand values") {
    std::vector<double> x = {1, 2, 3};
    CHECK(pearson(x, {3, 5, 7}) == doctest::Approx(1.0));    // y = 2x+1
    CHECK(pearson(x, {-1, -2, -3}) == doctest::Approx(-1.0));
    CHECK(pearson(x, {1, 2, 4}) == doctest::Approx(0.982).epsilon(0.001));
    CHECK_THROWS_AS(pearson({1, 1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("ranking metrics: hand cases") {
    std::vector<double> g = {6, 5, 4, 3, 2, 1};
    CHECK(precision_at_k({g, g}, 3) == 1.0);
    std::vector<double> rev(g.rbegin(), g.rend());
    CHECK(precision_at_k({g, rev}, 3) == 0.0);
    // ground ranks [0..5], pred ranks [1,0,3,2,5,4], K=2
    std::vector<double> p = {5, 6, 3, 4, 1, 2};
    CHECK(precision_at_k({g, p}, 2) == 1.0);

    CHECK(best_ranking_at_k({g, g}, 1) == 0.0);
    CHECK(best_ranking_at_k({g, rev}, 6) == 0.0);  // K = M includes everything
    CHECK(best_ranking_at_k({g, rev}, 2) == doctest::Approx(4.0 / 6));
    CHECK_THROWS_AS(precision_at_k({g, g}, 0), std::invalid_argument);
    CHECK_THROWS_AS(best_ranking_at_k({g, g}, 7), std::invalid_argument);
}

TEST_CASE("fractional-K variants reduce to the absolute convention") {
    std::vector<double> g = {6, 5, 4, 3, 2, 1};
    std::vector<double> p = {5, 6, 3, 4, 1, 2};
    CHECK(precision_at_fraction({g, p}, 1.0 / 3) == precision_at_k({g, p}, 2));
    CHECK(best_ranking_at_fraction({g, p}, 0.5) == best_ranking_at_k({g, p}, 3));
    CHECK_THROWS_AS(precision_at_fraction({g, p}, 0.0), std::invalid_argument);
}

TEST_CASE("ranking metrics match brute force on all permutations, M <= 6") {
    for (int m = 2; m <= 6; ++m) {
        std::vector<double> g(static_cast<size_t>(m)), p(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) g[static_cast<size_t>(i)] = m - i;  // distinct
        std::vector<int> perm(static_cast<size_t>(m));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            for (int i = 0; i < m; ++i)
                p[static_cast<size_t>(i)] = m - perm[static_cast<size_t>(i)];
            for (int k = 1; k <= m; ++k) {
                CHECK(precision_at_k({g, p}, k) == brute_precision(g, p, k));
                CHECK(best_ranking_at_k({g, p}, k) == brute_best_ranking(g, p, k));
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST_CASE("ranking metrics match brute force on random inputs, M = 50") {
    Rng rng(99);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> kpick(1, 50);
    for (int c = 0; c < 1000; ++c) {
        std::vector<double> g(50), p(50);
        for (size_t i = 0; i < 50; ++i) {
            g[i] = gauss(rng);
            p[i] = gauss(rng);
        }
        const int k = kpick(rng);
        CHECK(precision_at_k({g, p}, k) == brute_precision(g, p, k));
        CHECK(best_ranking_at_k({g, p}, k) == brute_best_ranking(g, p, k));
    }
}

TEST_CASE("sturges_bins: pinned values") {
    CHECK(sturges_bins(1000) == 24);
    CHECK(sturges_bins(2) == 3);
    CHECK(sturges_bins(3) == 5);
    CHECK_THROWS_AS(sturges_bins(1), std::invalid_argument);
}

TEST_CASE("conditional entropy: hand values in bits") {
    std::vector<double> y = {0, 1, 2, 3, 0, 1, 2, 3};
    BinSpec four{.n_bins = 4};
    CHECK(conditional_entropy(y, {}, four) == doctest::Approx(2.0));
    CHECK(conditional_entropy(y, {y}, four) == doctest::Approx(0.0));

    std::vector<double> constant(8, 5.0);
    CHECK(conditional_entropy(constant, {}, four) == doctest::Approx(0.0));
    CHECK_THROWS_AS(conditional_entropy(y, {{1, 2}}, four), std::invalid_argument);
}

TEST_CASE("independent noise leaves entropy near H(y), never above") {
    Rng rng(5);
    std::normal_distribution<double> gauss;
    std::vector<double> y(2000), z(2000);
    for (size_t i = 0; i < y.size(); ++i) {
        y[i] = gauss(rng);
        z[i] = gauss(rng);
    }
    const double hy = conditional_entropy(y, {});
    const double hyz = conditional_entropy(y, {z});
    CHECK(hyz <= hy);
    CHECK(hyz > 0.8 * hy);  // histogram-sparsity bias only
    CHECK(hy <= std::log2(sturges_bins(2000)));
}

TEST_CASE("property: plug-in entropy is monotone along subset chains") {
    Rng rng(123);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> np(1, 4);
    for (int c = 0; c < 500; ++c) {
        const size_t n = 40 + static_cast<size_t>(c % 60);
        std::vector<double> y(n);
        for (auto& v : y) v = gauss(rng);
        std::vector<std::vector<double>> zs(static_cast<size_t>(np(rng)));
        for (auto& z : zs) {
            z.resize(n);
            for (size_t i = 0; i < n; ++i) z[i] = 0.3 * y[i] + gauss(rng);
        }
        double prev = conditional_entropy(y, {});
        std::vector<std::vector<double>> prefix;
        for (const auto& z : zs) {
            prefix.push_back(z);
            const double h = conditional_entropy(y, prefix);
            CHECK(h <= prev + 1e-12);
            CHECK(h >= -1e-12);
            prev = h;
        }
    }
}

TEST_CASE("information gain: diagonal zero, duplicates add nothing") {
    Rng rng(7);
    std::normal_distribution<double> gauss;
    std::vector<double> y(300), z(300);
    for (size_t i = 0; i < y.size(); ++i) {
        y[i] = gauss(rng);
        z[i] = 0.5 * y[i] + gauss(rng);
    }
    CHECK(information_gain(y, {z}, z) == doctest::Approx(0.0));
    CHECK(information_gain(y, {}, y) == doctest::Approx(conditional_entropy(y, {})));
    for (int c = 0; c < 200; ++c) {
        std::vector<double> a(100), b(100);
        for (size_t i = 0; i < a.size(); ++i) {
            a[i] = gauss(rng);
            b[i] = gauss(rng);
        }
        CHECK(information_gain(a, {}, b) >= -1e-12);
    }
}

TEST_CASE("orderings: greedy first pick maximizes single-proxy gain") {
    SyntheticSpec spec;
    spec.n_archs = 400;
    spec.fidelity = {{"snip", 0.9}, {"plain", 0.1}, {"jacov", 0.4}};
    ScoreTable t = generate_synthetic(spec, 21);
    OrderingTrace greedy = ordering_greedy(t);
    const TableColumns tc = table_columns(t);
    double best_gain = -1;
    std::string best_name;
    for (size_t p = 0; p < tc.proxy_ids.size(); ++p) {
        const double g = information_gain(tc.y, {}, tc.z[p]);
        if (g > best_gain) {
            best_gain = g;
            best_name = tc.proxy_ids[p];
        }
    }
    REQUIRE_FALSE(greedy.chosen.empty());
    CHECK(greedy.chosen[0] == std::vector<std::string>{best_name});
}

TEST_CASE("orderings: exhaustive <= greedy <= random mean at every k") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticSpec spec;
        spec.n_archs = 150;
        ScoreTable t = generate_synthetic(spec, seed);
        OrderingTrace ex = ordering_exhaustive(t, 13);
        OrderingTrace gr = ordering_greedy(t);
        OrderingTrace rnd = ordering_random(t, 20, seed);
        REQUIRE(ex.h.size() == 13);
        REQUIRE(gr.h.size() == 13);
        REQUIRE(rnd.h.size() == 13);
        for (size_t k = 0; k < 13; ++k) {
            CHECK(ex.h[k] <= gr.h[k] + 1e-12);
            CHECK(gr.h[k] <= rnd.h[k] + 1e-9);
        }
    }
}

TEST_CASE("orderings: exhaustive budget guard") {
    std::vector<std::string> proxies(40);
    std::vector<std::vector<double>> cols(40, std::vector<double>(20));
    Rng rng(1);
    std::normal_distribution<double> gauss;
    std::vector<double> y(20);
    for (auto& v : y) v = gauss(rng);
    for (size_t p = 0; p < proxies.size(); ++p) {
        proxies[p] = "p" + std::to_string(p);
        for (auto& v : cols[p]) v = gauss(rng);
    }
    ScoreTable t = fake_table(proxies, y, cols);
    CHECK_THROWS_WITH_AS(ordering_exhaustive(t, 40), doctest::Contains("reduce k_max"),
                         std::invalid_argument);
}

TEST_CASE("generalization matrix: perfect proxy, sorted rows, missing cells") {
    SyntheticSpec spec;
    spec.n_archs = 300;
    spec.fidelity["synflow"] = 1.0;
    spec.noise_sd = 0.0;
    ScoreTable t = generate_synthetic(spec, 2);
    // Invalidate one proxy column entirely.
    for (auto& r : t.rows) r.scores.at("epe_nas").valid = false;

    Matrix m = generalization_matrix({t});
    REQUIRE(m.row_names.size() == 13);
    double synflow_val = 0;
    bool epe_missing = false;
    std::vector<double> means;
    for (size_t i = 0; i < m.row_names.size(); ++i) {
        if (m.row_names[i] == "synflow") synflow_val = m.values[i][0];
        if (m.row_names[i] == "epe_nas") epe_missing = std::isnan(m.values[i][0]);
        means.push_back(m.values[i][0]);
    }
    CHECK(synflow_val == doctest::Approx(1.0));
    CHECK(epe_missing);
    for (size_t i = 0; i + 1 < means.size(); ++i)
        if (std::isfinite(means[i]) && std::isfinite(means[i + 1]))
            CHECK(means[i] >= means[i + 1]);
}

TEST_CASE("cross-benchmark correlation: identity, symmetry, null bound") {
    SyntheticSpec spec;
    spec.n_archs = 1000;
    ScoreTable a = generate_synthetic(spec, 10);
    ScoreTable same = generate_synthetic(spec, 10);
    same.benchmark = "synthetic-b";
    Matrix m = cross_benchmark_correlation({a, same});
    CHECK(m.values[0][0] == 1.0);
    CHECK(m.values[1][1] == 1.0);
    CHECK(m.values[0][1] == doctest::Approx(1.0));
    CHECK(m.values[0][1] == m.values[1][0]);

    // Same arch ids, independently generated scores: weak correlation.
    SyntheticSpec null_spec = spec;
    for (const auto& p : proxy_catalog()) null_spec.fidelity[p] = 0.0;
    ScoreTable b = generate_synthetic(null_spec, 77);
    b.benchmark = "synthetic-c";
    Matrix m2 = cross_benchmark_correlation({a, b});
    CHECK(std::abs(m2.values[0][1]) < 0.15);

    CHECK_THROWS_AS(cross_benchmark_correlation({a}), std::invalid_argument);
}

TEST_CASE("entropy report: shapes and diagonal") {
    SyntheticSpec spec;
    spec.n_archs = 200;
    ScoreTable t = generate_synthetic(spec, 3);
    EntropyReport rep = entropy_report(t);
    CHECK(rep.sample_size == 200);
    CHECK(rep.n_bins == sturges_bins(200));
    REQUIRE(rep.proxy_ids.size() == 13);
    REQUIRE(rep.h_y_given_z.size() == 13);
    REQUIRE(rep.ig_pairs.size() == 13);
    for (size_t i = 0; i < 13; ++i) {
        CHECK(rep.h_y_given_z[i] <= rep.h_y + 1e-12);
        CHECK(rep.info_gain[i] == doctest::Approx(rep.h_y - rep.h_y_given_z[i]));
        CHECK(rep.ig_pairs[i][i] == 0.0);
    }
}

TEST_CASE("rank-sum p-value: identical and disjoint samples") {
    std::vector<double> a = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK(rank_sum_p(a, a) == doctest::Approx(1.0));
    std::vector<double> b;
    for (double v : a) b.push_back(v + 100);
    CHECK(rank_sum_p(a, b) < 0.001);
}
