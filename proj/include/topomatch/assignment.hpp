#pragma once

#include <vector>

#include <Eigen/Core>

namespace topomatch {

/// Optimal perfect assignment on a square matrix (Hungarian method with
/// potentials, O(n^3)). Returns the column assigned to each row.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight);

}  // namespace topomatch
