#pragma once

#include <Eigen/Dense>

namespace snnloop {

struct LqrSolution {
  Eigen::MatrixXd P;  // Riccati fixed point
  Eigen::MatrixXd K;  // feedback gain, u = -K x
  int iterations;
};

// Infinite-horizon discrete-time LQR via fixed-point iteration of
//   P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA
// starting from P = Q, until the max-abs change drops below `tol`.
// Throws SolverError if the cap is reached first.
LqrSolution lqr_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                      double tol = 1e-10, int max_iterations = 100000);

// Largest eigenvalue magnitude; used to check closed-loop stability.
double spectral_radius(const Eigen::MatrixXd& M);

}  // namespace snnloop
