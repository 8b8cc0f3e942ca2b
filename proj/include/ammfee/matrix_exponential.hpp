#pragma once

#include <Eigen/Dense>

namespace ammfee {

// exp(A) by scaling and squaring with diagonal Pade approximants (degrees
// 3, 5, 7, 9, 13 chosen by the 1-norm of A, Higham 2005 thresholds). With
// `force_degree_13` the degree-13 approximant is always used.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a, bool force_degree_13 = false);

}  // namespace ammfee
