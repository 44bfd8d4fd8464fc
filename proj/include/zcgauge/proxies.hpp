// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <string>
#include <vector>

#include "zcgauge/graph.hpp"

namespace zcgauge {

enum class TaskKind { Classification, Regression };

struct ProxyResult {
    std::string name;
    double score = 0.0;
    double seconds = 0.0;
    bool valid = true;
};

struct Minibatch {
    Tensor inputs;            // [B,C,H,W]
    std::vector<int> labels;  // in [0, classes)
};

// Seeded Gaussian images with uniform labels.
Minibatch synthetic_minibatch(int batch, int channels, int resolution, int classes, uint64_t seed);

// Fixed catalog order; these ids appear in score tables and CLI flags.
const std::vector<std::string>& proxy_catalog();

ProxyResult proxy_params(const Graph& g);
ProxyResult proxy_flops(const Graph& g, const Minibatch& batch);
ProxyResult proxy_l2_norm(const Graph& g);
ProxyResult proxy_plain(const Graph& g, const Minibatch& batch);
ProxyResult proxy_grad_norm(const Graph& g, const Minibatch& batch);
ProxyResult proxy_snip(const Graph& g, const Minibatch& batch);
ProxyResult proxy_grasp(const Graph& g, const Minibatch& batch);
ProxyResult proxy_fisher(const Graph& g, const Minibatch& batch);
ProxyResult proxy_synflow(const Graph& g, TaskKind task = TaskKind::Classification);
ProxyResult proxy_jacov(const Graph& g, const Minibatch& batch);
ProxyResult proxy_nwot(const Graph& g, const Minibatch& batch);
ProxyResult proxy_epe_nas(const Graph& g, const Minibatch& batch, TaskKind task);
ProxyResult proxy_zen(const Graph& g, const std::vector<int>& batch_shape, uint64_t seed);

// All 13 in catalog order; proxies undefined for the task come back
// valid=false with sentinel score 0.0 rather than omitted.
std::vector<ProxyResult> compute_all(const Graph& g, const Minibatch& batch, TaskKind task,
                                     uint64_t seed);

// Per-sample Jacobian of summed logits wrt the input, one row per sample.
// Exposed for the dense-oracle tests.
Eigen::MatrixXd input_jacobian(const Graph& g, const Minibatch& batch);

}  // namespace zcgauge
