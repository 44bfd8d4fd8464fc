// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include "zcgauge/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace zcgauge::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

VarPtr make(Tensor value, Op op, std::vector<VarPtr> parents) {
    auto v = std::make_shared<Var>();
    v->value = std::move(value);
    v->op = op;
    v->parents = std::move(parents);
    for (const auto& p : v->parents) v->requires_grad |= p->requires_grad;
    return v;
}

void check_same_shape(const VarPtr& a, const VarPtr& b, const char* what) {
    if (!a->value.same_shape(b->value))
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    shape_str(a->value.shape) + " vs " + shape_str(b->value.shape));
}

}  // namespace

VarPtr leaf(Tensor value, bool requires_grad) {
    auto v = std::make_shared<Var>();
    v->value = std::move(value);
    v->requires_grad = requires_grad;
    return v;
}

VarPtr constant(Tensor value) { return leaf(std::move(value), false); }

VarPtr add(const VarPtr& a, const VarPtr& b) {
    check_same_shape(a, b, "add");
    return make(Tensor(a->value.shape, a->value.data + b->value.data), Op::Add, {a, b});
}

VarPtr mul(const VarPtr& a, const VarPtr& b) {
    check_same_shape(a, b, "mul");
    return make(Tensor(a->value.shape, a->value.data * b->value.data), Op::Mul, {a, b});
}

VarPtr scale(const VarPtr& a, double c) {
    auto v = make(Tensor(a->value.shape, a->value.data * c), Op::Scale, {a});
    v->c = c;
    return v;
}

VarPtr add_scalar(const VarPtr& a, double c) {
    auto v = make(Tensor(a->value.shape, a->value.data + c), Op::AddScalar, {a});
    v->c = c;
    return v;
}

VarPtr matmul(const VarPtr& a, const VarPtr& b) {
    if (a->value.shape.size() != 2 || b->value.shape.size() != 2 ||
        a->value.shape[1] != b->value.shape[0])
        throw std::invalid_argument("matmul: incompatible shapes " +
                                    shape_str(a->value.shape) + " x " + shape_str(b->value.shape));
    const int m = a->value.shape[0], k = a->value.shape[1], n = b->value.shape[1];
    Tensor out({m, n});
    MapMat(out.data.data(), m, n).noalias() =
        MapConstMat(a->value.data.data(), m, k) * MapConstMat(b->value.data.data(), k, n);
    auto v = make(std::move(out), Op::MatMul, {a, b});
    v->rows = m;
    v->cols = n;
    return v;
}

VarPtr transpose(const VarPtr& a) {
    if (a->value.shape.size() != 2) throw std::invalid_argument("transpose: rank-2 only");
    const int m = a->value.shape[0], n = a->value.shape[1];
    Tensor out({n, m});
    MapMat(out.data.data(), n, m) = MapConstMat(a->value.data.data(), m, n).transpose();
    return make(std::move(out), Op::Transpose, {a});
}

VarPtr relu(const VarPtr& a) {
    return make(Tensor(a->value.shape, a->value.data.max(0.0)), Op::Relu, {a});
}

VarPtr vexp(const VarPtr& a) {
    return make(Tensor(a->value.shape, a->value.data.exp()), Op::Exp, {a});
}

VarPtr vlog(const VarPtr& a) {
    return make(Tensor(a->value.shape, a->value.data.log()), Op::Log, {a});
}

VarPtr pow_const(const VarPtr& a, double p) {
    auto v = make(Tensor(a->value.shape, a->value.data.pow(p)), Op::PowConst, {a});
    v->c = p;
    return v;
}

VarPtr gather(const VarPtr& a, IndexMap idx, std::vector<int> out_shape) {
    Tensor out(std::move(out_shape));
    if (out.size() != static_cast<Eigen::Index>(idx->size()))
        throw std::invalid_argument("gather: index map size mismatch");
    const auto& src = a->value.data;
    for (size_t i = 0; i < idx->size(); ++i) {
        const int64_t j = (*idx)[i];
        out.data[static_cast<Eigen::Index>(i)] = j >= 0 ? src[j] : 0.0;
    }
    auto v = make(std::move(out), Op::Gather, {a});
    v->idx = std::move(idx);
    return v;
}

VarPtr scatter(const VarPtr& a, IndexMap idx, std::vector<int> out_shape) {
    if (a->value.size() != static_cast<Eigen::Index>(idx->size()))
        throw std::invalid_argument("scatter: index map size mismatch");
    Tensor out(std::move(out_shape));
    for (size_t i = 0; i < idx->size(); ++i) {
        const int64_t j = (*idx)[i];
        if (j >= 0) out.data[j] += a->value.data[static_cast<Eigen::Index>(i)];
    }
    auto v = make(std::move(out), Op::Scatter, {a});
    v->idx = std::move(idx);
    return v;
}

VarPtr reshape(const VarPtr& a, std::vector<int> shape) {
    if (Tensor::size_of(shape) != a->value.size())
        throw std::invalid_argument("reshape: size mismatch " + shape_str(a->value.shape) +
                                    " -> " + shape_str(shape));
    return make(Tensor(std::move(shape), a->value.data), Op::Reshape, {a});
}

VarPtr sum_all(const VarPtr& a) {
    return make(Tensor({1}, Array::Constant(1, a->value.data.sum())), Op::SumAll, {a});
}

VarPtr broadcast_scalar(const VarPtr& a, std::vector<int> shape) {
    if (a->value.size() != 1) throw std::invalid_argument("broadcast_scalar: scalar input only");
    Tensor out(std::move(shape));
    out.data.setConstant(a->value.data[0]);
    return make(std::move(out), Op::BroadcastScalar, {a});
}

VarPtr sub(const VarPtr& a, const VarPtr& b) { return add(a, scale(b, -1.0)); }

VarPtr dot(const VarPtr& a, const VarPtr& b) { return sum_all(mul(a, b)); }

VarPtr sum_vars(const std::vector<VarPtr>& vs) {
    if (vs.empty()) throw std::invalid_argument("sum_vars: empty");
    VarPtr acc = vs[0];
    for (size_t i = 1; i < vs.size(); ++i) acc = add(acc, vs[i]);
    return acc;
}

namespace {

// Parent cotangents for `v` given output cotangent `g`. Entries are null
// for parents that do not require grad.
std::vector<VarPtr> backward_rule(const VarPtr& v, const VarPtr& g) {
    switch (v->op) {
        case Op::Leaf:
            return {};
        case Op::Add:
            return {g, g};
        case Op::Mul:
            return {mul(g, v->parents[1]), mul(g, v->parents[0])};
        case Op::Scale:
            return {scale(g, v->c)};
        case Op::AddScalar:
            return {g};
        case Op::MatMul:
            return {matmul(g, transpose(v->parents[1])), matmul(transpose(v->parents[0]), g)};
        case Op::Transpose:
            return {transpose(g)};
        case Op::Relu: {
            // Subgradient at 0 is 0; the mask is a constant of the tape.
            Tensor mask(v->parents[0]->value.shape,
                        (v->parents[0]->value.data > 0.0).cast<double>());
            return {mul(g, constant(std::move(mask)))};
        }
        case Op::Exp:
            return {mul(g, v)};
        case Op::Log:
            return {mul(g, pow_const(v->parents[0], -1.0))};
        case Op::PowConst:
            return {mul(g, scale(pow_const(v->parents[0], v->c - 1.0), v->c))};
        case Op::Gather:
            return {scatter(g, v->idx, v->parents[0]->value.shape)};
        case Op::Scatter:
            return {gather(g, v->idx, v->parents[0]->value.shape)};
        case Op::Reshape:
            return {reshape(g, v->parents[0]->value.shape)};
        case Op::SumAll:
            return {broadcast_scalar(g, v->parents[0]->value.shape)};
        case Op::BroadcastScalar:
            return {sum_all(g)};
    }
    throw std::logic_error("backward_rule: unhandled op");
}

void topo_visit(const VarPtr& v, std::unordered_set<const Var*>& seen, std::vector<VarPtr>& order) {
    if (!v->requires_grad || seen.count(v.get())) return;
    seen.insert(v.get());
    for (const auto& p : v->parents) topo_visit(p, seen, order);
    order.push_back(v);
}

}  // namespace

std::unordered_map<const Var*, VarPtr> backward(const VarPtr& root,
                                                const std::vector<VarPtr>& wrt) {
    std::unordered_set<const Var*> seen;
    std::vector<VarPtr> order;
    topo_visit(root, seen, order);

    std::unordered_map<const Var*, VarPtr> grads;
    grads[root.get()] = constant(Tensor::ones(root->value.shape));

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const VarPtr& v = *it;
        auto gi = grads.find(v.get());
        if (gi == grads.end()) continue;
        const VarPtr& g = gi->second;
        if (v->op == Op::Leaf) continue;
        auto pgrads = backward_rule(v, g);
        for (size_t i = 0; i < v->parents.size(); ++i) {
            const VarPtr& p = v->parents[i];
            if (!p->requires_grad) continue;
            auto pi = grads.find(p.get());
            if (pi == grads.end())
                grads[p.get()] = pgrads[i];
            else
                pi->second = add(pi->second, pgrads[i]);
        }
    }

    std::unordered_map<const Var*, VarPtr> out;
    for (const auto& w : wrt) {
        auto gi = grads.find(w.get());
        out[w.get()] = gi == grads.end() ? nullptr : gi->second;
    }
    return out;
}

}  // namespace zcgauge::ad
