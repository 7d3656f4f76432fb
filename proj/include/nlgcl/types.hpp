#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace nlgcl {

using Index = std::int64_t;

// Node-major embedding storage: one row per user or item.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace nlgcl
