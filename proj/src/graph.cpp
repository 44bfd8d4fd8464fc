// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include "zcgauge/graph.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace zcgauge {

using ad::VarPtr;

namespace {

constexpr double kBnEps = 1e-5;

std::string op_name(NodeOp op) {
    switch (op) {
        case NodeOp::Input: return "input";
        case NodeOp::ZeroConst: return "zero";
        case NodeOp::Conv2d: return "conv2d";
        case NodeOp::Dense: return "dense";
        case NodeOp::Relu: return "relu";
        case NodeOp::BatchNorm: return "batchnorm";
        case NodeOp::AvgPool: return "avgpool";
        case NodeOp::GlobalAvgPool: return "gap";
        case NodeOp::Add: return "add";
    }
    return "?";
}

[[noreturn]] void node_error(int node, NodeOp op, const std::string& msg) {
    throw std::runtime_error("node " + std::to_string(node) + " (" + op_name(op) + "): " + msg);
}

// Index-map cache: maps are pure functions of geometry and reused heavily
// across architectures during full-space runs.
struct KeyHash {
    size_t operator()(const std::array<int, 5>& k) const {
        size_t h = 1469598103934665603ull;
        for (int v : k) h = (h ^ static_cast<size_t>(v)) * 1099511628211ull;
        return h;
    }
};
std::unordered_map<std::array<int, 5>, ad::IndexMap, KeyHash> g_idx_cache;
std::mutex g_idx_mutex;

ad::IndexMap cached(const std::array<int, 5>& key, const std::function<std::vector<int64_t>()>& build) {
    std::lock_guard<std::mutex> lk(g_idx_mutex);
    auto it = g_idx_cache.find(key);
    if (it != g_idx_cache.end()) return it->second;
    auto m = std::make_shared<const std::vector<int64_t>>(build());
    g_idx_cache.emplace(key, m);
    return m;
}

// (b,y,x) rows, (c,dy,dx) cols; same padding.
ad::IndexMap im2col_map(int B, int C, int H, int W, int k) {
    return cached({B, C, H * 10000 + W, k, 0}, [=] {
        const int pad = k / 2;
        std::vector<int64_t> idx(static_cast<size_t>(B) * H * W * C * k * k);
        size_t p = 0;
        for (int b = 0; b < B; ++b)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x)
                    for (int c = 0; c < C; ++c)
                        for (int dy = 0; dy < k; ++dy)
                            for (int dx = 0; dx < k; ++dx) {
                                const int yy = y + dy - pad, xx = x + dx - pad;
                                idx[p++] = (yy < 0 || yy >= H || xx < 0 || xx >= W)
                                               ? -1
                                               : ((static_cast<int64_t>(b) * C + c) * H + yy) * W + xx;
                            }
        return idx;
    });
}

// (b,c,y,x) rows, (dy,dx) cols; per-channel 3x3 window with zero padding.
ad::IndexMap pool_map(int B, int C, int H, int W, int k) {
    return cached({B, C, H * 10000 + W, k, 1}, [=] {
        const int pad = k / 2;
        std::vector<int64_t> idx(static_cast<size_t>(B) * C * H * W * k * k);
        size_t p = 0;
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c)
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x)
                        for (int dy = 0; dy < k; ++dy)
                            for (int dx = 0; dx < k; ++dx) {
                                const int yy = y + dy - pad, xx = x + dx - pad;
                                idx[p++] = (yy < 0 || yy >= H || xx < 0 || xx >= W)
                                               ? -1
                                               : ((static_cast<int64_t>(b) * C + c) * H + yy) * W + xx;
                            }
        return idx;
    });
}

// [B*H*W, Cout] (b,y,x major) -> [B, Cout, H, W]
ad::IndexMap col2im_map(int B, int C, int H, int W) {
    return cached({B, C, H * 10000 + W, 0, 2}, [=] {
        std::vector<int64_t> idx(static_cast<size_t>(B) * C * H * W);
        size_t p = 0;
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c)
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x)
                        idx[p++] = (static_cast<int64_t>(b) * H * W + y * static_cast<int64_t>(W) + x) * C + c;
        return idx;
    });
}

// [B,C,H,W] -> [C, B*H*W]
ad::IndexMap to_channel_major(int B, int C, int H, int W) {
    return cached({B, C, H * 10000 + W, 0, 3}, [=] {
        std::vector<int64_t> idx(static_cast<size_t>(B) * C * H * W);
        size_t p = 0;
        for (int c = 0; c < C; ++c)
            for (int b = 0; b < B; ++b)
                for (int s = 0; s < H * W; ++s)
                    idx[p++] = (static_cast<int64_t>(b) * C + c) * H * W + s;
        return idx;
    });
}

// [C, B*H*W] -> [B,C,H,W]
ad::IndexMap from_channel_major(int B, int C, int H, int W) {
    return cached({B, C, H * 10000 + W, 0, 4}, [=] {
        std::vector<int64_t> idx(static_cast<size_t>(B) * C * H * W);
        size_t p = 0;
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c)
                for (int s = 0; s < H * W; ++s)
                    idx[p++] = static_cast<int64_t>(c) * B * H * W + static_cast<int64_t>(b) * H * W + s;
        return idx;
    });
}

VarPtr ones_const(std::vector<int> shape) { return ad::constant(Tensor::ones(std::move(shape))); }

}  // namespace

int Graph::add_node(GraphNode n) {
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
}

Tensor& Graph::add_param(const std::string& name, std::vector<int> shape, Rng& rng, int fan_in) {
    Tensor t(std::move(shape));
    if (fan_in > 0) {
        const double bound = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> u(-bound, bound);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = u(rng);
    }
    auto [it, inserted] = params.emplace(name, std::move(t));
    if (!inserted) throw std::invalid_argument("duplicate param " + name);
    return it->second;
}

long Graph::param_count() const {
    long n = 0;
    for (const auto& [name, t] : params) n += static_cast<long>(t.size());
    return n;
}

Session::Session(const Graph& g, SessionOptions opt) : graph_(g), opt_(opt) {
    for (const auto& [name, t] : g.params) {
        Tensor v = opt_.abs_params ? Tensor(t.shape, t.data.abs()) : t;
        param_vars_[name] = ad::leaf(std::move(v), true);
    }
}

ad::VarPtr Session::run(const Tensor& input) {
    if (ran_) throw std::logic_error("session: run called twice");
    ran_ = true;
    input_ = ad::leaf(input, true);
    acts_.assign(graph_.nodes.size(), nullptr);

    for (size_t ni = 0; ni < graph_.nodes.size(); ++ni) {
        const GraphNode& n = graph_.nodes[ni];
        const int node = static_cast<int>(ni);
        auto in = [&](size_t i) -> const VarPtr& {
            const VarPtr& v = acts_[static_cast<size_t>(n.inputs.at(i))];
            if (!v) node_error(node, n.op, "input node has no value");
            return v;
        };
        VarPtr out;
        switch (n.op) {
            case NodeOp::Input:
                out = input_;
                break;
            case NodeOp::ZeroConst:
                out = ad::constant(Tensor::zeros(in(0)->value.shape));
                break;
            case NodeOp::Conv2d: {
                const VarPtr& x = in(0);
                if (x->value.shape.size() != 4 || x->value.shape[1] != n.in_ch)
                    node_error(node, n.op, "expected [B," + std::to_string(n.in_ch) +
                                               ",H,W], got " + shape_str(x->value.shape));
                const int B = x->value.shape[0], H = x->value.shape[2], W = x->value.shape[3];
                const int k2 = n.kernel * n.kernel;
                auto col = ad::gather(x, im2col_map(B, n.in_ch, H, W, n.kernel),
                                      {B * H * W, n.in_ch * k2});
                auto wmat = ad::transpose(
                    ad::reshape(param_vars_.at(n.weight), {n.out_ch, n.in_ch * k2}));
                auto y = ad::matmul(col, wmat);  // [BHW, out]
                out = ad::gather(y, col2im_map(B, n.out_ch, H, W), {B, n.out_ch, H, W});
                break;
            }
            case NodeOp::Dense: {
                const VarPtr& x = in(0);
                if (x->value.shape.size() != 2 || x->value.shape[1] != n.in_ch)
                    node_error(node, n.op, "expected [B," + std::to_string(n.in_ch) +
                                               "], got " + shape_str(x->value.shape));
                const int B = x->value.shape[0];
                auto y = ad::matmul(x, param_vars_.at(n.weight));
                auto b = ad::matmul(ones_const({B, 1}),
                                    ad::reshape(param_vars_.at(n.bias), {1, n.out_ch}));
                out = ad::add(y, b);
                break;
            }
            case NodeOp::Relu:
                out = ad::relu(in(0));
                break;
            case NodeOp::BatchNorm: {
                const VarPtr& x = in(0);
                if (x->value.shape.size() != 4)
                    node_error(node, n.op, "expected rank-4, got " + shape_str(x->value.shape));
                if (opt_.bypass_bn) {
                    out = in(0);
                    break;
                }
                const int B = x->value.shape[0], C = x->value.shape[1];
                const int S = x->value.shape[2] * x->value.shape[3];
                const int N = B * S;
                auto xp = ad::gather(x, to_channel_major(B, C, x->value.shape[2], x->value.shape[3]),
                                     {C, N});
                auto mean = ad::scale(ad::matmul(xp, ones_const({N, 1})), 1.0 / N);   // [C,1]
                auto centered = ad::sub(xp, ad::matmul(mean, ones_const({1, N})));
                auto var = ad::scale(ad::matmul(ad::mul(centered, centered), ones_const({N, 1})),
                                     1.0 / N);  // [C,1]
                bn_var_[node] = Tensor({C}, var->value.data);
                auto inv_std = ad::pow_const(ad::add_scalar(var, kBnEps), -0.5);
                auto norm = ad::mul(centered, ad::matmul(inv_std, ones_const({1, N})));
                auto gam = ad::matmul(ad::reshape(param_vars_.at(n.scl), {C, 1}), ones_const({1, N}));
                auto bet = ad::matmul(ad::reshape(param_vars_.at(n.bias), {C, 1}), ones_const({1, N}));
                auto yp = ad::add(ad::mul(norm, gam), bet);
                out = ad::gather(yp, from_channel_major(B, C, x->value.shape[2], x->value.shape[3]),
                                 x->value.shape);
                break;
            }
            case NodeOp::AvgPool: {
                const VarPtr& x = in(0);
                if (x->value.shape.size() != 4)
                    node_error(node, n.op, "expected rank-4, got " + shape_str(x->value.shape));
                const int B = x->value.shape[0], C = x->value.shape[1];
                const int H = x->value.shape[2], W = x->value.shape[3];
                const int k2 = n.kernel * n.kernel;
                auto col = ad::gather(x, pool_map(B, C, H, W, n.kernel), {B * C * H * W, k2});
                auto avg = ad::scale(ad::matmul(col, ones_const({k2, 1})), 1.0 / k2);
                out = ad::reshape(avg, x->value.shape);
                break;
            }
            case NodeOp::GlobalAvgPool: {
                const VarPtr& x = in(0);
                if (x->value.shape.size() != 4)
                    node_error(node, n.op, "expected rank-4, got " + shape_str(x->value.shape));
                const int B = x->value.shape[0], C = x->value.shape[1];
                const int S = x->value.shape[2] * x->value.shape[3];
                auto avg = ad::scale(ad::matmul(ad::reshape(x, {B * C, S}), ones_const({S, 1})),
                                     1.0 / S);
                out = ad::reshape(avg, {B, C});
                break;
            }
            case NodeOp::Add: {
                std::vector<VarPtr> ins;
                for (size_t i = 0; i < n.inputs.size(); ++i) ins.push_back(in(i));
                if (ins.empty()) node_error(node, n.op, "no inputs");
                for (const auto& v : ins)
                    if (!v->value.same_shape(ins[0]->value))
                        node_error(node, n.op, "mismatched input shapes");
                out = ad::sum_vars(ins);
                break;
            }
        }
        acts_[ni] = out;
    }
    return acts_.at(static_cast<size_t>(graph_.output >= 0 ? graph_.output
                                                           : static_cast<int>(acts_.size()) - 1));
}

const VarPtr& Session::output() const {
    if (!ran_) throw std::logic_error("session: output before run");
    const int o = graph_.output >= 0 ? graph_.output : static_cast<int>(acts_.size()) - 1;
    return acts_.at(static_cast<size_t>(o));
}

VarPtr Session::activation(int node) const {
    if (!ran_) throw std::logic_error("session: activation before run");
    return acts_.at(static_cast<size_t>(node));
}

const VarPtr& Session::input_var() const {
    if (!ran_) throw std::logic_error("session: input before run");
    return input_;
}

std::vector<int> Session::relu_nodes() const {
    std::vector<int> out;
    for (size_t i = 0; i < graph_.nodes.size(); ++i)
        if (graph_.nodes[i].op == NodeOp::Relu) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> Session::bn_nodes() const {
    std::vector<int> out;
    for (size_t i = 0; i < graph_.nodes.size(); ++i)
        if (graph_.nodes[i].op == NodeOp::BatchNorm) out.push_back(static_cast<int>(i));
    return out;
}

VarPtr Session::cross_entropy(const std::vector<int>& labels) const {
    const VarPtr& logits = output();
    if (logits->value.shape.size() != 2)
        throw std::invalid_argument("cross_entropy: logits must be [B,K]");
    const int B = logits->value.shape[0], K = logits->value.shape[1];
    if (static_cast<int>(labels.size()) != B)
        throw std::invalid_argument("cross_entropy: label count mismatch");

    // Row max is a detached shift; gradient is unchanged.
    Tensor rowmax({B, 1});
    for (int b = 0; b < B; ++b)
        rowmax.data[b] = logits->value.data.segment(static_cast<Eigen::Index>(b) * K, K).maxCoeff();
    auto z = ad::sub(logits, ad::matmul(ad::constant(rowmax), ones_const({1, K})));
    auto lse = ad::vlog(ad::matmul(ad::vexp(z), ones_const({K, 1})));  // [B,1]
    auto pick_idx = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(B));
    for (int b = 0; b < B; ++b) {
        if (labels[b] < 0 || labels[b] >= K)
            throw std::invalid_argument("cross_entropy: label out of range");
        (*pick_idx)[static_cast<size_t>(b)] = static_cast<int64_t>(b) * K + labels[b];
    }
    auto picked = ad::gather(z, pick_idx, {B, 1});
    return ad::scale(ad::sum_all(ad::sub(lse, picked)), 1.0 / B);
}

VarPtr Session::sum_outputs() const { return ad::sum_all(output()); }

GradientTape Session::backward(const VarPtr& loss, BackwardOptions opt) const {
    if (!ran_) throw std::logic_error("session: backward before run");
    std::vector<VarPtr> wrt;
    for (const auto& [name, v] : param_vars_) wrt.push_back(v);
    if (opt.input_grad) wrt.push_back(input_);
    for (int n : opt.retain_activations) wrt.push_back(acts_.at(static_cast<size_t>(n)));

    auto grads = ad::backward(loss, wrt);
    GradientTape tape;
    for (const auto& [name, v] : param_vars_) {
        auto g = grads.at(v.get());
        tape.param_grads[name] = g ? g->value : Tensor::zeros(v->value.shape);
    }
    if (opt.input_grad) {
        auto g = grads.at(input_.get());
        tape.input_grad = g ? g->value : Tensor::zeros(input_->value.shape);
    }
    for (int n : opt.retain_activations) {
        const auto& v = acts_.at(static_cast<size_t>(n));
        auto g = grads.at(v.get());
        tape.activation_grads[n] = g ? g->value : Tensor::zeros(v->value.shape);
    }
    return tape;
}

std::map<std::string, VarPtr> Session::backward_vars(const VarPtr& loss) const {
    if (!ran_) throw std::logic_error("session: backward before run");
    std::vector<VarPtr> wrt;
    for (const auto& [name, v] : param_vars_) wrt.push_back(v);
    auto grads = ad::backward(loss, wrt);
    std::map<std::string, VarPtr> out;
    for (const auto& [name, v] : param_vars_) {
        auto g = grads.at(v.get());
        out[name] = g ? g : ad::constant(Tensor::zeros(v->value.shape));
    }
    return out;
}

GradientTape Session::hvp(const VarPtr& loss, const GradientTape& vec) const {
    auto gvars = backward_vars(loss);
    std::vector<VarPtr> terms;
    for (const auto& [name, g] : gvars) {
        auto vi = vec.param_grads.find(name);
        if (vi == vec.param_grads.end())
            throw std::invalid_argument("hvp: vector missing param " + name);
        terms.push_back(ad::dot(g, ad::constant(vi->second)));
    }
    auto s = ad::sum_vars(terms);
    std::vector<VarPtr> wrt;
    for (const auto& [name, v] : param_vars_) wrt.push_back(v);
    auto grads = ad::backward(s, wrt);
    GradientTape tape;
    for (const auto& [name, v] : param_vars_) {
        auto g = grads.at(v.get());
        tape.param_grads[name] = g ? g->value : Tensor::zeros(v->value.shape);
    }
    return tape;
}

Tensor forward(const Graph& g, const Tensor& input) {
    Session s(g);
    return s.run(input)->value;
}

double finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::runtime_error(std::string(what) + ": non-finite value");
    return v;
}

}  // namespace zcgauge
