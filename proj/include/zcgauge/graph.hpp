// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "zcgauge/autodiff.hpp"
#include "zcgauge/tensor.hpp"

namespace zcgauge {

using Rng = std::mt19937_64;

enum class NodeOp {
    Input,
    ZeroConst,      // all-zero feature map, same shape as its input
    Conv2d,         // same padding, stride 1, kernel 1 or 3, no bias
    Dense,          // weight [in,out] + bias [out]
    Relu,
    BatchNorm,      // train mode, batch statistics, learnable scale/shift
    AvgPool,        // kernel 3, stride 1, same padding
    GlobalAvgPool,  // [B,C,H,W] -> [B,C]
    Add,
};

struct GraphNode {
    NodeOp op = NodeOp::Input;
    std::vector<int> inputs;  // node indices
    std::string weight;       // conv/dense weight param
    std::string bias;         // dense bias / bn shift
    std::string scl;          // bn scale
    int kernel = 0;
    int in_ch = 0, out_ch = 0;
};

// Static network description: ops in topological order plus named params.
// Immutable once built; clone per concurrent evaluation.
struct Graph {
    std::vector<GraphNode> nodes;
    std::map<std::string, Tensor> params;
    int in_channels = 3;
    int resolution = 8;
    int classes = 10;
    int output = -1;        // logits node
    int feature_node = -1;  // pre-pool feature map, used by zen-score

    int add_node(GraphNode n);
    // Conv weight [out,in,k,k], Kaiming-uniform; BN scale 1, shift 0; bias 0.
    Tensor& add_param(const std::string& name, std::vector<int> shape, Rng& rng, int fan_in);
    long param_count() const;
};

struct GradientTape {
    std::map<std::string, Tensor> param_grads;
    std::optional<Tensor> input_grad;
    std::map<int, Tensor> activation_grads;  // node index -> grad wrt that activation
};

struct BackwardOptions {
    bool input_grad = false;
    std::vector<int> retain_activations;
};

struct SessionOptions {
    bool abs_params = false;  // run on |theta| (synflow)
    bool bypass_bn = false;   // treat batchnorm as identity (synflow)
};

// Executes a Graph on the tape. One forward per session; backward and hvp
// operate on the cached activations.
class Session {
  public:
    explicit Session(const Graph& g, SessionOptions opt = {});

    // Forward pass; returns logits. Caches all activations.
    ad::VarPtr run(const Tensor& input);

    const ad::VarPtr& output() const;
    ad::VarPtr activation(int node) const;
    const ad::VarPtr& input_var() const;
    const std::map<std::string, ad::VarPtr>& param_vars() const { return param_vars_; }
    // Per-channel batch variances of each batchnorm node (zen-score term).
    const std::map<int, Tensor>& bn_batch_var() const { return bn_var_; }
    std::vector<int> relu_nodes() const;
    std::vector<int> bn_nodes() const;

    ad::VarPtr cross_entropy(const std::vector<int>& labels) const;
    ad::VarPtr sum_outputs() const;

    GradientTape backward(const ad::VarPtr& loss, BackwardOptions opt = {}) const;
    // Gradient vars wrt params, still on the tape (differentiable again).
    std::map<std::string, ad::VarPtr> backward_vars(const ad::VarPtr& loss) const;
    // Hessian-vector product of loss wrt params.
    GradientTape hvp(const ad::VarPtr& loss, const GradientTape& vec) const;

  private:
    const Graph& graph_;
    SessionOptions opt_;
    std::map<std::string, ad::VarPtr> param_vars_;
    ad::VarPtr input_;
    std::vector<ad::VarPtr> acts_;
    std::map<int, Tensor> bn_var_;
    bool ran_ = false;
};

// Convenience wrappers matching the engine's contract.
Tensor forward(const Graph& g, const Tensor& input);

double finite(double v, const char* what);  // throws on non-finite

}  // namespace zcgauge
