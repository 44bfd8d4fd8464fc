// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include <doctest.h>

#include <set>

#include "zcgauge/archspace.hpp"

using namespace zcgauge;

namespace {

CellEncoding make(std::initializer_list<CellOp> ops) {
    CellEncoding e;
    int i = 0;
    for (CellOp op : ops) e.ops[static_cast<size_t>(i++)] = op;
    return e;
}

}  // namespace

TEST_CASE("enumeration covers the full space exactly once") {
    auto all = enumerate_space();
    CHECK(all.size() == 15625);
    std::set<long> seen;
    for (const auto& e : all) seen.insert(e.index());
    CHECK(seen.size() == 15625);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 15624);
}

TEST_CASE("lexicographic first is the all-zero cell") {
    auto first = enumerate_space(1);
    REQUIRE(first.size() == 1);
    for (CellOp op : first[0].ops) CHECK(op == CellOp::Zero);
}

TEST_CASE("exactly one cell has cell_size zero") {
    NetworkSpec spec;
    int empty = 0;
    for (const auto& e : enumerate_space())
        if (features_analytic(e, spec).cell_size == 0) ++empty;
    CHECK(empty == 1);
}

TEST_CASE("string form round-trips for every encoding") {
    for (const auto& e : enumerate_space()) {
        CHECK(CellEncoding::parse(e.to_string()) == e);
        CHECK(CellEncoding::from_index(e.index()) == e);
    }
}

TEST_CASE("canonical string layout") {
    CellEncoding e = make({CellOp::Conv3x3, CellOp::Skip, CellOp::Zero,
                           CellOp::Conv1x1, CellOp::AvgPool3x3, CellOp::Zero});
    CHECK(e.to_string() ==
          "|nor_conv_3x3~0|+|skip_connect~0|none~1|+|nor_conv_1x1~0|avg_pool_3x3~1|none~2|");
}

TEST_CASE("parse rejects malformed strings") {
    CHECK_THROWS_AS(CellEncoding::parse("|bogus~0|+|none~0|none~1|+|none~0|none~1|none~2|"),
                    std::invalid_argument);
    CHECK_THROWS_AS(CellEncoding::parse("|none~0|"), std::invalid_argument);
}

TEST_CASE("all-skip cell carries only stem and head params") {
    NetworkSpec spec;  // 8 stem channels, 10 classes, 3 input channels
    CellEncoding e = make({CellOp::Skip, CellOp::Skip, CellOp::Skip,
                           CellOp::Skip, CellOp::Skip, CellOp::Skip});
    Graph g = build_network(e, spec, 0);
    // stem: 3*8*9 conv + 2*8 bn = 232; head: 8*10 + 10 = 90
    CHECK(g.param_count() == 322);
    CHECK(features(e, g).num_params == 322);
    CHECK(features_analytic(e, spec).num_params == 322);
}

TEST_CASE("one conv3x3 edge adds 8*8*3*3 + 2*8 params") {
    NetworkSpec spec;
    CellEncoding skip_only = make({CellOp::Skip, CellOp::Skip, CellOp::Skip,
                                   CellOp::Skip, CellOp::Skip, CellOp::Skip});
    CellEncoding one_conv = skip_only;
    one_conv.ops[0] = CellOp::Conv3x3;
    const long base = build_network(skip_only, spec, 0).param_count();
    const long with_conv = build_network(one_conv, spec, 0).param_count();
    CHECK(with_conv - base == 8 * 8 * 3 * 3 + 2 * 8);

    CellEncoding one_conv1 = skip_only;
    one_conv1.ops[0] = CellOp::Conv1x1;
    CHECK(build_network(one_conv1, spec, 0).param_count() - base == 8 * 8 + 2 * 8);
}

TEST_CASE("same encoding and seed give bit-identical weights") {
    NetworkSpec spec;
    CellEncoding e = CellEncoding::from_index(4321);
    Graph a = build_network(e, spec, 99);
    Graph b = build_network(e, spec, 99);
    REQUIRE(a.params.size() == b.params.size());
    for (const auto& [name, t] : a.params) CHECK((t.data == b.params.at(name).data).all());
    Graph c = build_network(e, spec, 100);
    bool any_diff = false;
    for (const auto& [name, t] : c.params)
        if ((t.data != a.params.at(name).data).any()) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("features counts ops by definition") {
    NetworkSpec spec;
    CellEncoding e = make({CellOp::Conv3x3, CellOp::Conv1x1, CellOp::AvgPool3x3,
                           CellOp::Skip, CellOp::Zero, CellOp::Zero});
    ArchFeatures f = features_analytic(e, spec);
    CHECK(f.conv_pool_ratio == 1.0);  // 2 conv - 1 pool
    CHECK(f.cell_size == 4);
    CHECK(f.num_skip == 1);

    ArchFeatures zero = features_analytic(CellEncoding::from_index(0), spec);
    CHECK(zero.cell_size == 0);
    CHECK(zero.num_skip == 0);
    CHECK(zero.conv_pool_ratio == 0.0);

    CellEncoding skips = make({CellOp::Skip, CellOp::Skip, CellOp::Skip,
                               CellOp::Skip, CellOp::Skip, CellOp::Skip});
    CHECK(features_analytic(skips, spec).num_skip == 6);
}

TEST_CASE("analytic features agree with graph-derived features everywhere") {
    NetworkSpec spec;
    for (long i = 0; i < kSpaceSize; i += 97) {
        CellEncoding e = CellEncoding::from_index(i);
        Graph g = build_network(e, spec, 1);
        ArchFeatures a = features(e, g);
        ArchFeatures b = features_analytic(e, spec);
        CHECK(a.num_params == b.num_params);
        CHECK(a.cell_size == b.cell_size);
        CHECK(a.num_skip == b.num_skip);
        CHECK(a.conv_pool_ratio == b.conv_pool_ratio);
        int zeros = 0;
        for (CellOp op : e.ops)
            if (op == CellOp::Zero) ++zeros;
        CHECK(a.cell_size == 6 - zeros);
        long brute = 0;
        for (const auto& [name, t] : g.params) brute += t.size();
        CHECK(a.num_params == brute);
    }
}

TEST_CASE("mutate changes exactly one edge, uniformly") {
    Rng rng(2024);
    CellEncoding e = CellEncoding::from_index(7777);
    std::array<int, kNumEdges> edge_hits{};
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        CellEncoding m = mutate(e, rng);
        int diff = -1, count = 0;
        for (int i = 0; i < kNumEdges; ++i)
            if (m.ops[static_cast<size_t>(i)] != e.ops[static_cast<size_t>(i)]) {
                diff = i;
                ++count;
            }
        REQUIRE(count == 1);
        ++edge_hits[static_cast<size_t>(diff)];
    }
    for (int h : edge_hits) CHECK(std::abs(h / double(trials) - 1.0 / 6) < 0.02);
}

TEST_CASE("mutation is reversible") {
    Rng rng(5);
    CellEncoding e = CellEncoding::from_index(100);
    CellEncoding m = mutate(e, rng);
    bool returned = false;
    for (int t = 0; t < 1000 && !returned; ++t) returned = (mutate(m, rng) == e);
    CHECK(returned);
}

TEST_CASE("flops counts convolution and dense MACs") {
    NetworkSpec spec;
    CellEncoding zero = CellEncoding::from_index(0);
    // stem conv on 8x8: 64 * 3 * 8 * 9; head dense: 8 * 10
    CHECK(network_flops(zero, spec) == 64L * 3 * 8 * 9 + 8 * 10);
    CellEncoding one_conv = zero;
    one_conv.ops[0] = CellOp::Conv3x3;
    CHECK(network_flops(one_conv, spec) - network_flops(zero, spec) == 64L * 8 * 8 * 9);
}
