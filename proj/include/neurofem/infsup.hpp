#pragma once

#include "neurofem/common.hpp"

namespace neurofem {

struct InfSupEstimate {
    double alpha_h = 0.0;  ///< coercivity of the symmetric part of A on ker(B^T)
    double beta_h = 0.0;   ///< inf-sup constant of B
    Index kernel_dim = 0;
};

/// Inverse square root of an SPD Gram matrix via symmetric eigendecomposition.
/// Throws std::invalid_argument when the matrix is not positive definite.
Eigen::MatrixXd gram_inverse_sqrt(const Eigen::MatrixXd& gram);

/// Orthonormal (Euclidean) basis of ker(B^T) = range(B)^perp from a
/// column-pivoted QR with relative rank tolerance 1e-12.
Eigen::MatrixXd left_null_space(const Eigen::MatrixXd& b, double tol = 1e-12);

/// B is test x trial. beta_h is the smallest singular value of
/// G_V^{-1/2} B G_U^{-1/2}; alpha_h the smallest eigenvalue (clamped at 0) of
/// the G_V-whitened symmetric part of A restricted to ker(B^T). When the kernel
/// is trivial alpha_h is taken over the whole test space.
InfSupEstimate estimate_infsup(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& trial_gram,
                               const Eigen::MatrixXd& test_gram);

/// Smallest and largest eigenvalue of G^{-1/2} A_sym G^{-1/2}.
std::pair<double, double> whitened_eigen_range(const Eigen::MatrixXd& a, const Eigen::MatrixXd& gram);

/// min over v in span(basis) of |v^T A v| / v^T G v. Zero when the symmetric
/// part is indefinite on the subspace.
double subspace_coercivity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& gram, const Eigen::MatrixXd& basis);

}  // namespace neurofem
