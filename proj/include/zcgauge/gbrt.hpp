// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace zcgauge::nas {

// Gradient-boosted regression trees, squared loss, exact greedy splits.
struct GbrtParams {
    int n_trees = 100;
    int max_depth = 6;
    double learning_rate = 0.1;
    int min_leaf = 2;
};

class Gbrt {
  public:
    explicit Gbrt(GbrtParams params = {}) : params_(params) {}

    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
    bool fitted() const { return fitted_; }

  private:
    struct Node {
        int feature = -1;  // -1 = leaf
        double threshold = 0.0;
        double value = 0.0;
        int left = -1, right = -1;
    };
    struct Tree {
        std::vector<Node> nodes;
        double predict_one(const Eigen::RowVectorXd& x) const;
    };

    Tree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& residual,
                  const std::vector<int>& rows) const;
    int grow(Tree& tree, const Eigen::MatrixXd& x, const Eigen::VectorXd& residual,
             std::vector<int>& rows, int depth) const;

    GbrtParams params_;
    double base_ = 0.0;
    std::vector<Tree> trees_;
    bool fitted_ = false;
};

}  // namespace zcgauge::nas
