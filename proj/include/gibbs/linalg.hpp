#ifndef GIBBS_LINALG_HPP
#define GIBBS_LINALG_HPP

#include <Eigen/Dense>

namespace gibbs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Relative eigenvalue floor below which a symmetric matrix is treated as
/// singular: lambda_min < kSingularRatio * lambda_max.
inline constexpr double kSingularRatio = 1e-12;

struct SymEig {
    Vec values;   // ascending
    Mat vectors;  // columns
};

/// Symmetric eigendecomposition. Throws ConditioningError when the matrix is
/// not positive definite to within kSingularRatio.
SymEig spd_eig(const Mat& m, const char* what = "matrix");

bool is_symmetric(const Mat& m, double tol = 1e-12);

Mat spd_sqrt(const Mat& m);
Mat spd_inv_sqrt(const Mat& m);
Mat spd_inverse(const Mat& m);
double spd_log_det(const Mat& m);

inline Vec scalar_vec(double x) { return Vec::Constant(1, x); }
inline Mat scalar_mat(double x) { return Mat::Constant(1, 1, x); }

} // namespace gibbs

#endif
