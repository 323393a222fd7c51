#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "meshfab/graph.hpp"

namespace meshfab {

// Column-stochastic transition matrix: column j spreads node j's mass evenly
// over its out-neighbours; columns with no outgoing edges are patched to the
// uniform column 1/N so every column sums to one.
struct TransitionMatrix {
  Eigen::SparseMatrix<double> H;

  Eigen::Index size() const { return H.rows(); }
  Eigen::MatrixXf dense32() const { return Eigen::MatrixXd(H).cast<float>(); }
};

TransitionMatrix build_transition(const Graph& g);

}  // namespace meshfab
