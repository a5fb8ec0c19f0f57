#include "snnloop/lqr.hpp"

#include <Eigen/Eigenvalues>
#include <string>

#include "snnloop/errors.hpp"

namespace snnloop {

LqrSolution lqr_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                      double tol, int max_iterations) {
  const auto n = A.rows();
  const auto m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != m || R.cols() != m) {
    throw ValidationError("lqr_solve: incompatible matrix dimensions");
  }
  if (!Q.isApprox(Q.transpose()) || !R.isApprox(R.transpose())) {
    throw ValidationError("lqr_solve: Q and R must be symmetric");
  }
  if (R.llt().info() != Eigen::Success) {
    throw ValidationError("lqr_solve: R must be positive definite");
  }

  Eigen::MatrixXd P = Q;
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::MatrixXd BtP = B.transpose() * P;
    Eigen::MatrixXd gain = (R + BtP * B).ldlt().solve(BtP * A);
    Eigen::MatrixXd next =
        Q + A.transpose() * P * A - A.transpose() * P * B * gain;
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (!P.allFinite()) {
      throw SolverError("lqr_solve: iteration diverged");
    }
    if (change < tol) {
      Eigen::MatrixXd BtPf = B.transpose() * P;
      Eigen::MatrixXd K = (R + BtPf * B).ldlt().solve(BtPf * A);
      return LqrSolution{P, K, it};
    }
  }
  throw SolverError("lqr_solve: no convergence within " +
                    std::to_string(max_iterations) + " iterations");
}

double spectral_radius(const Eigen::MatrixXd& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace snnloop
