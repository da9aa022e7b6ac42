#pragma once

#include <Eigen/Dense>

namespace pap {

// Two-stage covering data: min c'x + max_h min_y d'y  s.t.  A x + B y >= h, x, y >= 0.
struct Instance {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd c;
  Eigen::VectorXd d;

  Eigen::Index m() const { return A.rows(); }
  Eigen::Index n() const { return A.cols(); }

  // Throws DimensionMismatch or InvalidArgument.
  void validate() const;
};

}  // namespace pap
