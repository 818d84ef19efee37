#include "neurofem/infsup.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace neurofem {

Eigen::MatrixXd gram_inverse_sqrt(const Eigen::MatrixXd& gram) {
    if (gram.rows() != gram.cols())
        throw std::invalid_argument("gram_inverse_sqrt: Gram matrix is not square");
    if (gram.rows() == 0)
        return gram;
    const Eigen::MatrixXd sym = 0.5 * (gram + gram.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > 1e-14 * top))
        throw std::invalid_argument("gram_inverse_sqrt: Gram matrix is not positive definite");
    return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           eig.eigenvectors().transpose();
}

Eigen::MatrixXd left_null_space(const Eigen::MatrixXd& b, double tol) {
    const Index m = b.rows();
    if (b.cols() == 0)
        return Eigen::MatrixXd::Identity(m, m);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b);
    qr.setThreshold(tol);
    const Index rank = qr.rank();
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
    return q.rightCols(m - rank);
}

std::pair<double, double> whitened_eigen_range(const Eigen::MatrixXd& a, const Eigen::MatrixXd& gram) {
    const Eigen::MatrixXd w = gram_inverse_sqrt(gram);
    const Eigen::MatrixXd s = w * (0.5 * (a + a.transpose())) * w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
    return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

double subspace_coercivity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& gram, const Eigen::MatrixXd& basis) {
    if (basis.cols() == 0)
        return 0.0;
    const Eigen::MatrixXd ak = basis.transpose() * a * basis;
    const Eigen::MatrixXd gk = basis.transpose() * gram * basis;
    const auto [lo, hi] = whitened_eigen_range(ak, gk);
    if (lo * hi <= 0.0)
        return 0.0;
    return std::min(std::abs(lo), std::abs(hi));
}

InfSupEstimate estimate_infsup(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& trial_gram,
                               const Eigen::MatrixXd& test_gram) {
    if (a.rows() != a.cols() || a.rows() != b.rows() || test_gram.rows() != b.rows() ||
        trial_gram.rows() != b.cols())
        throw std::invalid_argument("estimate_infsup: block dimensions are inconsistent");
    InfSupEstimate est;
    const Eigen::MatrixXd wv = gram_inverse_sqrt(test_gram);
    const Eigen::MatrixXd wu = gram_inverse_sqrt(trial_gram);
    if (b.cols() > b.rows()) {
        est.beta_h = 0.0;
    } else if (b.cols() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(wv * b * wu);
        est.beta_h = svd.singularValues().minCoeff();
    }

    Eigen::MatrixXd kernel = left_null_space(b);
    est.kernel_dim = kernel.cols();
    if (kernel.cols() == 0)
        kernel = Eigen::MatrixXd::Identity(a.rows(), a.rows());
    const Eigen::MatrixXd ak = kernel.transpose() * a * kernel;
    const Eigen::MatrixXd gk = kernel.transpose() * test_gram * kernel;
    est.alpha_h = std::max(0.0, whitened_eigen_range(ak, gk).first);
    return est;
}

}  // namespace neurofem
