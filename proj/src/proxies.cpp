// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include "zcgauge/proxies.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>

namespace zcgauge {

namespace {

using Clock = std::chrono::steady_clock;

ProxyResult timed(const std::string& name, const std::function<double()>& fn) {
    ProxyResult r;
    r.name = name;
    const auto t0 = Clock::now();
    try {
        r.score = fn();
        r.valid = std::isfinite(r.score);
    } catch (const std::exception&) {
        r.valid = false;
    }
    if (!r.valid) r.score = 0.0;  // sentinel
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (r.seconds <= 0.0) r.seconds = 1e-9;
    return r;
}

double param_grad_sum(const Graph& g, const Minibatch& batch,
                      const std::function<double(const Array&, const Array&)>& reduce) {
    Session s(g);
    s.run(batch.inputs);
    auto loss = s.cross_entropy(batch.labels);
    auto tape = s.backward(loss);
    double total = 0.0;
    for (const auto& [name, grad] : tape.param_grads)
        total += reduce(g.params.at(name).data, grad.data);
    return total;
}

Eigen::MatrixXd row_correlation(const Eigen::MatrixXd& J) {
    const Eigen::Index n = J.rows();
    // Correlation across samples (rows).
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rm = J.rowwise().mean();
    Eigen::MatrixXd rc = J.colwise() - rm;
    Eigen::VectorXd sd = rc.rowwise().norm();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) c(i, j) = rc.row(i).dot(rc.row(j)) / (sd(i) * sd(j));
    return c;
}

}  // namespace

Minibatch synthetic_minibatch(int batch, int channels, int resolution, int classes,
                              uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> lab(0, classes - 1);
    Minibatch mb;
    mb.inputs = Tensor({batch, channels, resolution, resolution});
    for (Eigen::Index i = 0; i < mb.inputs.size(); ++i) mb.inputs.data[i] = gauss(rng);
    mb.labels.resize(static_cast<size_t>(batch));
    for (auto& l : mb.labels) l = lab(rng);
    return mb;
}

const std::vector<std::string>& proxy_catalog() {
    static const std::vector<std::string> ids = {"epe_nas", "fisher", "flops",  "grad_norm",
                                                 "grasp",   "l2_norm", "jacov", "nwot",
                                                 "params",  "plain",  "snip",  "synflow",
                                                 "zen"};
    return ids;
}

ProxyResult proxy_params(const Graph& g) {
    return timed("params", [&] { return static_cast<double>(g.param_count()); });
}

ProxyResult proxy_flops(const Graph& g, const Minibatch&) {
    return timed("flops", [&] {
        const long R2 = static_cast<long>(g.resolution) * g.resolution;
        long macs = 0;
        for (const auto& n : g.nodes) {
            if (n.op == NodeOp::Conv2d)
                macs += R2 * static_cast<long>(n.in_ch) * n.out_ch * n.kernel * n.kernel;
            if (n.op == NodeOp::Dense) macs += static_cast<long>(n.in_ch) * n.out_ch;
        }
        return static_cast<double>(macs);
    });
}

ProxyResult proxy_l2_norm(const Graph& g) {
    return timed("l2_norm", [&] {
        double ss = 0.0;
        for (const auto& [name, t] : g.params) ss += t.data.square().sum();
        return std::sqrt(ss);
    });
}

ProxyResult proxy_plain(const Graph& g, const Minibatch& batch) {
    return timed("plain", [&] {
        return param_grad_sum(g, batch,
                              [](const Array& w, const Array& gr) { return (w * gr).sum(); });
    });
}

ProxyResult proxy_grad_norm(const Graph& g, const Minibatch& batch) {
    return timed("grad_norm", [&] {
        const double ss = param_grad_sum(
            g, batch, [](const Array&, const Array& gr) { return gr.square().sum(); });
        return std::sqrt(ss);
    });
}

ProxyResult proxy_snip(const Graph& g, const Minibatch& batch) {
    return timed("snip", [&] {
        return param_grad_sum(g, batch,
                              [](const Array& w, const Array& gr) { return (w * gr).abs().sum(); });
    });
}

ProxyResult proxy_grasp(const Graph& g, const Minibatch& batch) {
    return timed("grasp", [&] {
        Session s(g);
        s.run(batch.inputs);
        auto loss = s.cross_entropy(batch.labels);
        auto gvars = s.backward_vars(loss);
        GradientTape gt;
        for (const auto& [name, v] : gvars) gt.param_grads[name] = v->value;
        auto hg = s.hvp(loss, gt);
        double total = 0.0;
        for (const auto& [name, hgv] : hg.param_grads)
            total += -(g.params.at(name).data * hgv.data).sum();
        return total;
    });
}

ProxyResult proxy_fisher(const Graph& g, const Minibatch& batch) {
    return timed("fisher", [&] {
        Session s(g);
        s.run(batch.inputs);
        auto loss = s.cross_entropy(batch.labels);
        BackwardOptions opt;
        opt.retain_activations = s.bn_nodes();
        auto tape = s.backward(loss, opt);
        double total = 0.0;
        for (int node : opt.retain_activations) {
            const auto& a = s.activation(node)->value;
            const auto& gr = tape.activation_grads.at(node);
            // Per-channel saliency (sum over batch and spatial dims, squared).
            const int B = a.shape[0], C = a.shape[1];
            const int S = static_cast<int>(a.size()) / (B * C);
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (int b = 0; b < B; ++b) {
                    const Eigen::Index off = (static_cast<Eigen::Index>(b) * C + c) * S;
                    acc += (a.data.segment(off, S) * gr.data.segment(off, S)).sum();
                }
                total += acc * acc;
            }
        }
        return total;
    });
}

ProxyResult proxy_synflow(const Graph& g, TaskKind task) {
    if (task != TaskKind::Classification) {
        // Matches the released tables: 0.0 sentinel on non-classification tasks.
        ProxyResult r;
        r.name = "synflow";
        r.valid = false;
        r.seconds = 1e-9;
        return r;
    }
    return timed("synflow", [&] {
        Session s(g, {.abs_params = true, .bypass_bn = true});
        std::vector<int> in_shape = {1, g.in_channels, g.resolution, g.resolution};
        bool conv_input = false;
        for (const auto& n : g.nodes)
            if (n.op == NodeOp::Conv2d || n.op == NodeOp::AvgPool || n.op == NodeOp::BatchNorm)
                conv_input = true;
        if (!conv_input) {
            // Hand-built dense graphs: feed [1, fan_in] ones.
            for (const auto& n : g.nodes)
                if (n.op == NodeOp::Dense) {
                    in_shape = {1, n.in_ch};
                    break;
                }
        }
        s.run(Tensor::ones(in_shape));
        auto tape = s.backward(s.sum_outputs());
        double total = 0.0;
        for (const auto& [name, grad] : tape.param_grads)
            total += (g.params.at(name).data.abs() * grad.data).sum();
        return total;
    });
}

Eigen::MatrixXd input_jacobian(const Graph& g, const Minibatch& batch) {
    // One backward per sample. A single backward of the summed logits is
    // degenerate here: every cell node ends in batchnorm, whose output summed
    // over (batch, spatial) is constant, so the total-sum gradient vanishes.
    Session s(g);
    auto out = s.run(batch.inputs);
    const int B = batch.inputs.shape[0];
    const Eigen::Index K = out->value.size() / B;
    const Eigen::Index per = batch.inputs.size() / B;
    Eigen::MatrixXd J(B, per);
    BackwardOptions opt;
    opt.input_grad = true;
    for (int b = 0; b < B; ++b) {
        auto idx = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(K));
        for (Eigen::Index c = 0; c < K; ++c)
            (*idx)[static_cast<size_t>(c)] = static_cast<int64_t>(b) * K + c;
        auto loss = ad::sum_all(ad::gather(out, idx, {static_cast<int>(K)}));
        auto tape = s.backward(loss, opt);
        J.row(b) =
            tape.input_grad->data.segment(static_cast<Eigen::Index>(b) * per, per).transpose();
    }
    return J;
}

ProxyResult proxy_jacov(const Graph& g, const Minibatch& batch) {
    return timed("jacov", [&] {
        const double k = 1e-5;
        Eigen::MatrixXd corr = row_correlation(input_jacobian(g, batch));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
        double score = 0.0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double lam = es.eigenvalues()(i);
            score -= std::log(lam + k) + 1.0 / (lam + k);
        }
        return score;
    });
}

ProxyResult proxy_nwot(const Graph& g, const Minibatch& batch) {
    return timed("nwot", [&] {
        Session s(g);
        s.run(batch.inputs);
        const int B = batch.inputs.shape[0];
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(B, B);
        for (int node : s.relu_nodes()) {
            const auto& a = s.activation(node)->value;
            const Eigen::Index per = a.size() / B;
            Eigen::MatrixXd codes(B, per);
            for (int b = 0; b < B; ++b)
                codes.row(b) = (a.data.segment(static_cast<Eigen::Index>(b) * per, per) > 0.0)
                                   .cast<double>()
                                   .transpose();
            // Agreements: active matches + inactive matches.
            Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(B, per);
            K += codes * codes.transpose() + (ones - codes) * (ones - codes).transpose();
        }
        if (s.relu_nodes().empty()) throw std::runtime_error("nwot: no relu layers");
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < B; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
        return logdet;
    });
}

ProxyResult proxy_epe_nas(const Graph& g, const Minibatch& batch, TaskKind task) {
    if (task != TaskKind::Classification) {
        ProxyResult r;
        r.name = "epe_nas";
        r.valid = false;
        r.seconds = 1e-9;
        return r;
    }
    return timed("epe_nas", [&] {
        const double k = 1e-5;
        Eigen::MatrixXd J = input_jacobian(g, batch);
        std::map<int, std::vector<int>> by_class;
        for (size_t i = 0; i < batch.labels.size(); ++i)
            by_class[batch.labels[i]].push_back(static_cast<int>(i));
        double score = 0.0;
        bool any = false;
        for (const auto& [cls, rows] : by_class) {
            if (rows.size() < 2) continue;
            Eigen::MatrixXd Jc(rows.size(), J.cols());
            for (size_t r = 0; r < rows.size(); ++r) Jc.row(static_cast<Eigen::Index>(r)) = J.row(rows[r]);
            Eigen::MatrixXd corr = row_correlation(Jc);
            const double s = (corr.array().abs() + k).log().sum();
            if (!std::isfinite(s)) throw std::runtime_error("epe_nas: non-finite class score");
            score += std::abs(s);
            any = true;
        }
        if (!any) throw std::runtime_error("epe_nas: no class with >= 2 samples");
        return score;
    });
}

ProxyResult proxy_zen(const Graph& g, const std::vector<int>& batch_shape, uint64_t seed) {
    return timed("zen", [&] {
        const double eps = 0.01;
        Rng rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Tensor x1(batch_shape), x2(batch_shape);
        for (Eigen::Index i = 0; i < x1.size(); ++i) {
            x1.data[i] = gauss(rng);
            x2.data[i] = x1.data[i] + eps * gauss(rng);
        }
        Session s1(g), s2(g);
        s1.run(x1);
        s2.run(x2);
        const int fnode = g.feature_node >= 0 ? g.feature_node : g.output;
        const auto& f1 = s1.activation(fnode)->value;
        const auto& f2 = s2.activation(fnode)->value;
        const double delta = (f1.data - f2.data).abs().mean();
        double score = std::log(delta);
        for (const auto& [node, var] : s1.bn_batch_var())
            score += std::log(std::sqrt(var.data.mean() + 1e-12));
        return score;
    });
}

std::vector<ProxyResult> compute_all(const Graph& g, const Minibatch& batch, TaskKind task,
                                     uint64_t seed) {
    std::vector<ProxyResult> out;
    out.reserve(proxy_catalog().size());
    out.push_back(proxy_epe_nas(g, batch, task));
    out.push_back(proxy_fisher(g, batch));
    out.push_back(proxy_flops(g, batch));
    out.push_back(proxy_grad_norm(g, batch));
    out.push_back(proxy_grasp(g, batch));
    out.push_back(proxy_l2_norm(g));
    out.push_back(proxy_jacov(g, batch));
    out.push_back(proxy_nwot(g, batch));
    out.push_back(proxy_params(g));
    out.push_back(proxy_plain(g, batch));
    out.push_back(proxy_snip(g, batch));
    out.push_back(proxy_synflow(g, task));
    out.push_back(proxy_zen(g, batch.inputs.shape, seed));
    return out;
}

}  // namespace zcgauge
