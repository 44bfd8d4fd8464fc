// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "zcgauge/tensor.hpp"

namespace zcgauge::ad {

// Reverse-mode tape over dense tensors. Every backward rule is itself
// built from these primitives, so gradients are differentiable and a
// second backward pass yields Hessian-vector products.
enum class Op {
    Leaf,
    Add,
    Mul,
    Scale,
    AddScalar,
    MatMul,
    Transpose,
    Relu,
    Exp,
    Log,
    PowConst,
    Gather,
    Scatter,
    Reshape,
    SumAll,
    BroadcastScalar,
};

struct Var;
using VarPtr = std::shared_ptr<Var>;
using IndexMap = std::shared_ptr<const std::vector<int64_t>>;

struct Var {
    Tensor value;
    bool requires_grad = false;
    Op op = Op::Leaf;
    std::vector<VarPtr> parents;
    double c = 0.0;     // scale factor / scalar addend / exponent
    IndexMap idx;       // gather/scatter index map
    int rows = 0, cols = 0;  // matmul operand layout (m,k)x(k,n): rows=m, cols=n
};

VarPtr leaf(Tensor value, bool requires_grad);
VarPtr constant(Tensor value);

VarPtr add(const VarPtr& a, const VarPtr& b);
VarPtr mul(const VarPtr& a, const VarPtr& b);
VarPtr scale(const VarPtr& a, double c);
VarPtr add_scalar(const VarPtr& a, double c);
// a viewed as [m,k], b as [k,n]; result [m,n]
VarPtr matmul(const VarPtr& a, const VarPtr& b);
VarPtr transpose(const VarPtr& a);
VarPtr relu(const VarPtr& a);
VarPtr vexp(const VarPtr& a);
VarPtr vlog(const VarPtr& a);
VarPtr pow_const(const VarPtr& a, double p);
// out[i] = idx[i] >= 0 ? a[idx[i]] : 0
VarPtr gather(const VarPtr& a, IndexMap idx, std::vector<int> out_shape);
// out[j] = sum of a[i] over i with idx[i] == j; a.size() == idx->size()
VarPtr scatter(const VarPtr& a, IndexMap idx, std::vector<int> out_shape);
VarPtr reshape(const VarPtr& a, std::vector<int> shape);
VarPtr sum_all(const VarPtr& a);
VarPtr broadcast_scalar(const VarPtr& a, std::vector<int> shape);

// Conveniences built on the primitives.
VarPtr sub(const VarPtr& a, const VarPtr& b);
VarPtr dot(const VarPtr& a, const VarPtr& b);
VarPtr sum_vars(const std::vector<VarPtr>& vs);

// Gradients of `root` (any shape; seeded with ones) with respect to `wrt`.
// Returned vars carry their own tape, so they can be differentiated again.
// Vars in `wrt` that the root does not depend on get nullptr.
std::unordered_map<const Var*, VarPtr> backward(
    const VarPtr& root, const std::vector<VarPtr>& wrt);

}  // namespace zcgauge::ad
