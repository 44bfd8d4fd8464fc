// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include "zcgauge/gbrt.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace zcgauge::nas {

double Gbrt::Tree::predict_one(const Eigen::RowVectorXd& x) const {
    int i = 0;
    while (nodes[static_cast<size_t>(i)].feature >= 0) {
        const Node& n = nodes[static_cast<size_t>(i)];
        i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<size_t>(i)].value;
}

int Gbrt::grow(Tree& tree, const Eigen::MatrixXd& x, const Eigen::VectorXd& residual,
               std::vector<int>& rows, int depth) const {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    double sum = 0;
    for (int r : rows) sum += residual(r);
    const double mean = sum / static_cast<double>(rows.size());

    if (depth >= params_.max_depth || static_cast<int>(rows.size()) < 2 * params_.min_leaf) {
        tree.nodes[static_cast<size_t>(node_id)].value = mean;
        return node_id;
    }

    // Exact greedy split: maximize SSE reduction; ties break on the lowest
    // feature index, then lowest threshold, for determinism.
    int best_feature = -1;
    double best_threshold = 0, best_gain = 1e-12;
    std::vector<int> order(rows);
    for (int f = 0; f < x.cols(); ++f) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
            return a < b;
        });
        double left_sum = 0;
        const double total = sum;
        const int n = static_cast<int>(order.size());
        for (int i = 0; i < n - 1; ++i) {
            left_sum += residual(order[static_cast<size_t>(i)]);
            const double xv = x(order[static_cast<size_t>(i)], f);
            const double xn = x(order[static_cast<size_t>(i + 1)], f);
            if (xv == xn) continue;
            const int nl = i + 1, nr = n - nl;
            if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr -
                                total * total / n;
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = f;
                best_threshold = (xv + xn) / 2.0;
            }
        }
    }

    if (best_feature < 0) {
        tree.nodes[static_cast<size_t>(node_id)].value = mean;
        return node_id;
    }

    std::vector<int> left, right;
    for (int r : rows)
        (x(r, best_feature) <= best_threshold ? left : right).push_back(r);
    tree.nodes[static_cast<size_t>(node_id)].feature = best_feature;
    tree.nodes[static_cast<size_t>(node_id)].threshold = best_threshold;
    const int l = grow(tree, x, residual, left, depth + 1);
    const int r = grow(tree, x, residual, right, depth + 1);
    tree.nodes[static_cast<size_t>(node_id)].left = l;
    tree.nodes[static_cast<size_t>(node_id)].right = r;
    return node_id;
}

Gbrt::Tree Gbrt::fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& residual,
                          const std::vector<int>& rows) const {
    Tree tree;
    std::vector<int> r(rows);
    grow(tree, x, residual, r, 0);
    return tree;
}

void Gbrt::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() == 0) throw std::invalid_argument("gbrt: fit on empty set");
    if (x.rows() != y.size()) throw std::invalid_argument("gbrt: x/y size mismatch");
    trees_.clear();
    base_ = y.mean();
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(y.size(), base_);
    std::vector<int> rows(static_cast<size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    for (int t = 0; t < params_.n_trees; ++t) {
        const Eigen::VectorXd residual = y - pred;
        Tree tree = fit_tree(x, residual, rows);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            pred(i) += params_.learning_rate * tree.predict_one(x.row(i));
        trees_.push_back(std::move(tree));
    }
    fitted_ = true;
}

Eigen::VectorXd Gbrt::predict(const Eigen::MatrixXd& x) const {
    if (!fitted_) throw std::logic_error("gbrt: predict before fit");
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), base_);
    for (const Tree& tree : trees_)
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            out(i) += params_.learning_rate * tree.predict_one(x.row(i));
    return out;
}

}  // namespace zcgauge::nas
