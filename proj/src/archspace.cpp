// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include "zcgauge/archspace.hpp"

#include <sstream>
#include <stdexcept>

namespace zcgauge {

namespace {

const std::array<std::string, kNumOps> kOpNames = {
    "none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"};

// Edge e -> (source, target) on the 4-node DAG.
constexpr std::array<std::pair<int, int>, kNumEdges> kEdges = {
    {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}}};

}  // namespace

const std::string& cell_op_name(CellOp op) { return kOpNames[static_cast<size_t>(op)]; }

CellOp parse_cell_op(const std::string& name) {
    for (int i = 0; i < kNumOps; ++i)
        if (kOpNames[static_cast<size_t>(i)] == name) return static_cast<CellOp>(i);
    throw std::invalid_argument("unknown cell op '" + name + "'");
}

std::string CellEncoding::to_string() const {
    std::ostringstream os;
    int e = 0;
    for (int target = 1; target <= 3; ++target) {
        if (target > 1) os << "+";
        os << "|";
        for (int src = 0; src < target; ++src, ++e)
            os << cell_op_name(ops[static_cast<size_t>(e)]) << "~" << src << "|";
    }
    return os.str();
}

CellEncoding CellEncoding::parse(const std::string& s) {
    CellEncoding enc;
    size_t e = 0, pos = 0;
    while (pos < s.size()) {
        if (s[pos] == '|' || s[pos] == '+') {
            ++pos;
            continue;
        }
        const size_t bar = s.find('|', pos);
        if (bar == std::string::npos) throw std::invalid_argument("bad encoding: " + s);
        const std::string tok = s.substr(pos, bar - pos);
        const size_t tilde = tok.find('~');
        if (tilde == std::string::npos || e >= kNumEdges)
            throw std::invalid_argument("bad encoding: " + s);
        enc.ops[e++] = parse_cell_op(tok.substr(0, tilde));
        pos = bar;
    }
    if (e != kNumEdges) throw std::invalid_argument("bad encoding (wrong edge count): " + s);
    return enc;
}

long CellEncoding::index() const {
    long v = 0;
    for (int e = 0; e < kNumEdges; ++e) v = v * kNumOps + static_cast<long>(ops[static_cast<size_t>(e)]);
    return v;
}

CellEncoding CellEncoding::from_index(long i) {
    if (i < 0 || i >= kSpaceSize) throw std::out_of_range("encoding index out of range");
    CellEncoding enc;
    for (int e = kNumEdges - 1; e >= 0; --e) {
        enc.ops[static_cast<size_t>(e)] = static_cast<CellOp>(i % kNumOps);
        i /= kNumOps;
    }
    return enc;
}

std::vector<CellEncoding> enumerate_space(std::optional<long> limit) {
    const long n = limit ? std::min(*limit, kSpaceSize) : kSpaceSize;
    std::vector<CellEncoding> out;
    out.reserve(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) out.push_back(CellEncoding::from_index(i));
    return out;
}

namespace {

// relu -> conv -> bn block; returns output node index.
int add_conv_block(Graph& g, int input, int channels, int kernel, const std::string& prefix,
                   Rng& rng) {
    const int r = g.add_node({NodeOp::Relu, {input}});
    g.add_param(prefix + ".conv.w", {channels, channels, kernel, kernel}, rng,
                channels * kernel * kernel);
    const int c = g.add_node(
        {NodeOp::Conv2d, {r}, prefix + ".conv.w", "", "", kernel, channels, channels});
    auto& gamma = g.add_param(prefix + ".bn.gamma", {channels}, rng, 0);
    gamma.data.setOnes();
    g.add_param(prefix + ".bn.beta", {channels}, rng, 0);
    return g.add_node({NodeOp::BatchNorm, {c}, "", prefix + ".bn.beta", prefix + ".bn.gamma", 0,
                       channels, channels});
}

}  // namespace

Graph build_network(const CellEncoding& enc, const NetworkSpec& spec, uint64_t seed) {
    Rng rng(seed);
    Graph g;
    g.in_channels = spec.in_channels;
    g.resolution = spec.resolution;
    g.classes = spec.classes;
    const int C = spec.stem_channels;

    const int input = g.add_node({NodeOp::Input, {}});
    g.add_param("stem.conv.w", {C, spec.in_channels, 3, 3}, rng, spec.in_channels * 9);
    const int stem_conv =
        g.add_node({NodeOp::Conv2d, {input}, "stem.conv.w", "", "", 3, spec.in_channels, C});
    auto& sg = g.add_param("stem.bn.gamma", {C}, rng, 0);
    sg.data.setOnes();
    g.add_param("stem.bn.beta", {C}, rng, 0);
    int cur = g.add_node(
        {NodeOp::BatchNorm, {stem_conv}, "", "stem.bn.beta", "stem.bn.gamma", 0, C, C});

    for (int cell = 0; cell < spec.num_cells; ++cell) {
        std::array<int, 4> node_val{cur, -1, -1, -1};
        for (int target = 1; target <= 3; ++target) {
            std::vector<int> contribs;
            for (int e = 0; e < kNumEdges; ++e) {
                if (kEdges[static_cast<size_t>(e)].second != target) continue;
                const int src = node_val[static_cast<size_t>(kEdges[static_cast<size_t>(e)].first)];
                const std::string prefix =
                    "cell" + std::to_string(cell) + ".edge" + std::to_string(e);
                switch (enc.ops[static_cast<size_t>(e)]) {
                    case CellOp::Zero:
                        break;
                    case CellOp::Skip:
                        contribs.push_back(src);
                        break;
                    case CellOp::Conv1x1:
                        contribs.push_back(add_conv_block(g, src, C, 1, prefix, rng));
                        break;
                    case CellOp::Conv3x3:
                        contribs.push_back(add_conv_block(g, src, C, 3, prefix, rng));
                        break;
                    case CellOp::AvgPool3x3:
                        contribs.push_back(g.add_node({NodeOp::AvgPool, {src}, "", "", "", 3, C, C}));
                        break;
                }
            }
            int v;
            if (contribs.empty())
                v = g.add_node({NodeOp::ZeroConst, {cur}});
            else if (contribs.size() == 1)
                v = contribs[0];
            else
                v = g.add_node({NodeOp::Add, contribs});
            node_val[static_cast<size_t>(target)] = v;
        }
        cur = node_val[3];
    }

    g.feature_node = cur;
    const int gap = g.add_node({NodeOp::GlobalAvgPool, {cur}});
    g.add_param("head.w", {C, spec.classes}, rng, C);
    g.add_param("head.b", {spec.classes}, rng, 0);
    g.output = g.add_node({NodeOp::Dense, {gap}, "head.w", "head.b", "", 0, C, spec.classes});
    return g;
}

namespace {

void count_ops(const CellEncoding& enc, int& conv, int& pool, int& skip, int& nonzero) {
    conv = pool = skip = nonzero = 0;
    for (CellOp op : enc.ops) {
        if (op != CellOp::Zero) ++nonzero;
        if (op == CellOp::Conv1x1 || op == CellOp::Conv3x3) ++conv;
        if (op == CellOp::AvgPool3x3) ++pool;
        if (op == CellOp::Skip) ++skip;
    }
}

}  // namespace

ArchFeatures features(const CellEncoding& enc, const Graph& graph) {
    int conv, pool, skip, nonzero;
    count_ops(enc, conv, pool, skip, nonzero);
    return {static_cast<double>(conv - pool), nonzero, skip, graph.param_count()};
}

ArchFeatures features_analytic(const CellEncoding& enc, const NetworkSpec& spec) {
    int conv, pool, skip, nonzero;
    count_ops(enc, conv, pool, skip, nonzero);
    const int C = spec.stem_channels;
    long params = static_cast<long>(spec.in_channels) * C * 9 + 2L * C;  // stem
    params += static_cast<long>(C) * spec.classes + spec.classes;        // head
    for (CellOp op : enc.ops) {
        long edge = 0;
        if (op == CellOp::Conv1x1) edge = static_cast<long>(C) * C + 2L * C;
        if (op == CellOp::Conv3x3) edge = static_cast<long>(C) * C * 9 + 2L * C;
        params += edge * spec.num_cells;
    }
    return {static_cast<double>(conv - pool), nonzero, skip, params};
}

CellEncoding mutate(const CellEncoding& enc, Rng& rng) {
    std::uniform_int_distribution<int> edge_dist(0, kNumEdges - 1);
    std::uniform_int_distribution<int> op_dist(0, kNumOps - 2);
    const int e = edge_dist(rng);
    int o = op_dist(rng);
    if (o >= static_cast<int>(enc.ops[static_cast<size_t>(e)])) ++o;
    CellEncoding out = enc;
    out.ops[static_cast<size_t>(e)] = static_cast<CellOp>(o);
    return out;
}

long network_flops(const CellEncoding& enc, const NetworkSpec& spec) {
    const long R2 = static_cast<long>(spec.resolution) * spec.resolution;
    const int C = spec.stem_channels;
    long macs = R2 * spec.in_channels * C * 9;          // stem conv
    macs += static_cast<long>(C) * spec.classes;        // head
    for (CellOp op : enc.ops) {
        long k2 = 0;
        if (op == CellOp::Conv1x1) k2 = 1;
        if (op == CellOp::Conv3x3) k2 = 9;
        macs += R2 * static_cast<long>(C) * C * k2 * spec.num_cells;
    }
    return macs;
}

}  // namespace zcgauge
