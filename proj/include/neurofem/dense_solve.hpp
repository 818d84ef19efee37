#pragma once

#include "neurofem/common.hpp"

#include <Eigen/LU>

namespace neurofem {

/// Relative pivot threshold below which a matrix is reported singular.
inline constexpr double kSingularPivot = 1e-14;

/// LU factorization with partial pivoting that refuses (numerically) singular
/// matrices. The matrix is first equilibrated, R A C with diagonal R and C
/// from a few Ruiz sweeps, which keeps badly scaled saddle systems accurate.
/// Holds the factors so transposed solves can reuse them.
template <typename Scalar>
class DenseLU {
public:
    using Matrix = MatrixX<Scalar>;
    using Vector = VectorX<Scalar>;

    DenseLU() = default;

    explicit DenseLU(const Matrix& a, int equilibration_sweeps = 5) {
        if (a.rows() != a.cols())
            throw std::invalid_argument("DenseLU: matrix is not square");
        const Index n = a.rows();
        row_scale_ = Vector::Ones(n);
        col_scale_ = Vector::Ones(n);
        if (n == 0)
            return;
        using std::abs;
        using std::sqrt;
        const Scalar scale = a.cwiseAbs().maxCoeff();
        if (!(scale > Scalar(0)))
            throw SingularMatrixError("DenseLU: zero matrix", 0.0);
        Matrix s = a;
        for (int sweep = 0; sweep < equilibration_sweeps; ++sweep) {
            const Vector rmax = s.cwiseAbs().rowwise().maxCoeff();
            const Vector cmax = s.cwiseAbs().colwise().maxCoeff().transpose();
            for (Index i = 0; i < n; ++i) {
                const Scalar r = rmax[i] > Scalar(0) ? Scalar(1) / sqrt(rmax[i]) : Scalar(1);
                const Scalar c = cmax[i] > Scalar(0) ? Scalar(1) / sqrt(cmax[i]) : Scalar(1);
                row_scale_[i] *= r;
                col_scale_[i] *= c;
                s.row(i) *= r;
                s.col(i) *= c;
            }
        }
        lu_.compute(s);
        const auto pivots = lu_.matrixLU().diagonal().cwiseAbs();
        min_pivot_ = pivots.minCoeff();
        max_pivot_ = pivots.maxCoeff();
        const Scalar scaled = s.cwiseAbs().maxCoeff();
        if (!(min_pivot_ >= Scalar(kSingularPivot) * scaled) || !lu_.matrixLU().allFinite())
            throw SingularMatrixError("DenseLU: pivot below singularity threshold", static_cast<double>(min_pivot_));
    }

    template <typename Derived>
    Vector solve(const Eigen::MatrixBase<Derived>& rhs) const {
        if (lu_.rows() == 0)
            return Vector(0);
        const Vector y = lu_.solve(Vector(row_scale_.cwiseProduct(rhs)));
        return col_scale_.cwiseProduct(y);
    }

    template <typename Derived>
    Vector solve_transpose(const Eigen::MatrixBase<Derived>& rhs) const {
        if (lu_.rows() == 0)
            return Vector(0);
        const Vector z = lu_.transpose().solve(Vector(col_scale_.cwiseProduct(rhs)));
        return row_scale_.cwiseProduct(z);
    }

    template <typename Derived>
    Matrix solve_matrix(const Eigen::MatrixBase<Derived>& rhs) const {
        if (lu_.rows() == 0)
            return Matrix(0, rhs.cols());
        const Matrix y = lu_.solve(Matrix(row_scale_.asDiagonal() * rhs));
        return col_scale_.asDiagonal() * y;
    }

    Index size() const { return lu_.rows(); }
    /// Ratio of smallest to largest pivot of the equilibrated matrix.
    Scalar pivot_ratio() const { return max_pivot_ > Scalar(0) ? min_pivot_ / max_pivot_ : Scalar(0); }

private:
    Eigen::PartialPivLU<Matrix> lu_;
    Vector row_scale_;
    Vector col_scale_;
    Scalar min_pivot_ = Scalar(0);
    Scalar max_pivot_ = Scalar(0);
};

/// Solve A x = b by LU with partial pivoting.
template <typename DerivedA, typename DerivedB>
VectorX<typename DerivedA::Scalar> dense_solve(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    if (a.rows() != a.cols())
        throw std::invalid_argument("dense_solve: matrix is not square");
    if (b.rows() != a.rows())
        throw std::invalid_argument("dense_solve: right-hand side length mismatch");
    return DenseLU<Scalar>(a.eval()).solve(b);
}

}  // namespace neurofem
