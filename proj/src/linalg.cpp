#include "gibbs/linalg.hpp"

#include <string>

#include "gibbs/error.hpp"

namespace gibbs {

SymEig spd_eig(const Mat& m, const char* what)
{
    if (m.rows() != m.cols() || m.rows() == 0)
        throw ConditioningError(std::string(what) + ": not a non-empty square matrix");
    Eigen::SelfAdjointEigenSolver<Mat> solver(m);
    if (solver.info() != Eigen::Success)
        throw ConditioningError(std::string(what) + ": eigendecomposition failed");
    const Vec& ev = solver.eigenvalues();
    const double lmax = ev(ev.size() - 1);
    const double lmin = ev(0);
    if (!(lmax > 0.0) || !(lmin > kSingularRatio * lmax))
        throw ConditioningError(std::string(what) + ": numerically singular (lambda_min = " +
                                std::to_string(lmin) + ", lambda_max = " + std::to_string(lmax) + ")");
    return {ev, solver.eigenvectors()};
}

bool is_symmetric(const Mat& m, double tol)
{
    if (m.rows() != m.cols())
        return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

Mat spd_sqrt(const Mat& m)
{
    const auto e = spd_eig(m);
    return e.vectors * e.values.cwiseSqrt().asDiagonal() * e.vectors.transpose();
}

Mat spd_inv_sqrt(const Mat& m)
{
    const auto e = spd_eig(m);
    return e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * e.vectors.transpose();
}

Mat spd_inverse(const Mat& m)
{
    const auto e = spd_eig(m);
    return e.vectors * e.values.cwiseInverse().asDiagonal() * e.vectors.transpose();
}

double spd_log_det(const Mat& m)
{
    return spd_eig(m).values.array().log().sum();
}

} // namespace gibbs
