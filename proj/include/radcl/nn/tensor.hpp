#pragma once

#include <Eigen/Dense>

namespace radcl::nn {

// Activations are row-per-position / row-per-example; weights are stored
// (out x in) and applied as x * W.transpose().
template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

}  // namespace radcl::nn
