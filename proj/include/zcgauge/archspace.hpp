// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "zcgauge/graph.hpp"

namespace zcgauge {

// Cell edge operations, in canonical (lexicographic) order.
enum class CellOp : int { Zero = 0, Skip = 1, Conv1x1 = 2, Conv3x3 = 3, AvgPool3x3 = 4 };

constexpr int kNumEdges = 6;
constexpr int kNumOps = 5;

const std::string& cell_op_name(CellOp op);
CellOp parse_cell_op(const std::string& name);

// One op per edge of the 4-node complete DAG. Edge order:
// (0,1) (0,2) (1,2) (0,3) (1,3) (2,3).
struct CellEncoding {
    std::array<CellOp, kNumEdges> ops{};

    // Canonical string form: |op~0|+|op~0|op~1|+|op~0|op~1|op~2|
    std::string to_string() const;
    static CellEncoding parse(const std::string& s);

    long index() const;  // base-5, ops[0] most significant
    static CellEncoding from_index(long i);

    bool operator==(const CellEncoding&) const = default;
};

struct NetworkSpec {
    int stem_channels = 8;
    int num_cells = 1;
    int classes = 10;
    int resolution = 8;
    int in_channels = 3;
};

struct ArchFeatures {
    double conv_pool_ratio = 0;  // conv count minus pool count
    int cell_size = 0;           // non-zero ops
    int num_skip = 0;
    long num_params = 0;
};

// Deterministic lexicographic enumeration of all 5^6 encodings.
std::vector<CellEncoding> enumerate_space(std::optional<long> limit = std::nullopt);
constexpr long kSpaceSize = 15625;

Graph build_network(const CellEncoding& enc, const NetworkSpec& spec, uint64_t seed);

ArchFeatures features(const CellEncoding& enc, const Graph& graph);
// Same features without building a graph (closed-form parameter count).
ArchFeatures features_analytic(const CellEncoding& enc, const NetworkSpec& spec);

// Resample exactly one edge's op uniformly among the other four.
CellEncoding mutate(const CellEncoding& enc, Rng& rng);

// Multiply-accumulate count of one forward pass per sample.
long network_flops(const CellEncoding& enc, const NetworkSpec& spec);

}  // namespace zcgauge
