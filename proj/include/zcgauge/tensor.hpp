// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace zcgauge {

using Array = Eigen::ArrayXd;

/// Dense row-major tensor of doubles. Shapes are small (desk-scale nets),
/// so all data lives in one flat Eigen array.
struct Tensor {
    std::vector<int> shape;
    Array data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(Array::Zero(size_of(shape))) {}
    Tensor(std::vector<int> s, Array d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != size_of(shape))
            throw std::invalid_argument("tensor: shape/data size mismatch");
    }

    static Eigen::Index size_of(const std::vector<int>& s) {
        Eigen::Index n = 1;
        for (int d : s) n *= d;
        return n;
    }

    Eigen::Index size() const { return data.size(); }
    int dim(int i) const { return shape.at(static_cast<size_t>(i)); }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor ones(std::vector<int> s) {
        Tensor t(std::move(s));
        t.data.setOnes();
        return t;
    }
    static Tensor scalar(double v) { return Tensor({1}, Array::Constant(1, v)); }
    static Tensor from(std::vector<int> s, std::initializer_list<double> vals) {
        Tensor t(std::move(s));
        if (static_cast<size_t>(t.size()) != vals.size())
            throw std::invalid_argument("tensor: initializer size mismatch");
        Eigen::Index i = 0;
        for (double v : vals) t.data[i++] = v;
        return t;
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const { return data.isFinite().all(); }
};

std::string shape_str(const std::vector<int>& s);

}  // namespace zcgauge
