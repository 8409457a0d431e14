#ifndef GIBBS_EDGEWORTH_HPP
#define GIBBS_EDGEWORTH_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "gibbs/exec.hpp"
#include "gibbs/family.hpp"

namespace gibbs {

/// Multi-index nu = (nu_1, ..., nu_d) with |nu| = sum nu_i.
using MultiIndex = std::vector<unsigned>;

/// All multi-indices of weight 3 in dimension d, lexicographically ascending.
/// There are C(d+2, 3) of them.
std::vector<MultiIndex> weight3_indices(std::size_t dim);

/// nu! = prod nu_i!
double multi_factorial(const MultiIndex& nu);

enum class EdgeworthOrder { Zero, One };

/// Average third cumulants keyed by multi-index; std::map keeps them in
/// lexicographic order.
using CumulantMap = std::map<MultiIndex, double>;

/// Order-0/order-1 Edgeworth model for the normalized sum
///   m^{-1/2} B (S - mean_sum),  B = V^{-1/2},  V = (1/m) sum_j Cov(X_j^theta).
struct EdgeworthModel {
    std::size_t dim = 0;
    std::size_t count = 0;
    Vec mean_sum;
    Mat B;
    Mat V;
    CumulantMap avg_third_cumulants;  // raw chi_bar_nu; the nu! divisor is applied at evaluation
    EdgeworthOrder order = EdgeworthOrder::One;
};

/// Builds the model for the members tilted by theta. Throws ConditioningError
/// when the averaged covariance is numerically singular.
EdgeworthModel build_model(std::span<const FamilyMember> members, const Vec& theta, EdgeworthOrder order);

/// E[(B (X^theta - m(theta)))^nu] for every |nu| = 3 (third cumulant equals
/// the third central moment).
CumulantMap third_cumulant(const FamilyMember& member, const Vec& theta, const Mat& B);

/// Tensor-product probabilists' Hermite polynomial prod_i He_{nu_i}(x_i), |nu| = 3.
double hermite3(const MultiIndex& nu, const Vec& x);

/// P_1^#(x) = sum_{|nu|=3} chi_bar_nu / nu! * H_nu(x).
double correction_polynomial(const EdgeworthModel& model, const Vec& x);

/// Standard normal density in dimension dim(x).
double std_normal_density(const Vec& x);

/// phi(x) [1 + m^{-1/2} P_1^#(x)] (order One) or phi(x) (order Zero).
double edgeworth_density(const EdgeworthModel& model, const Vec& x);

/// Normalized coordinate m^{-1/2} B (s - mean_sum) of a raw sum value s.
Vec normalize(const EdgeworthModel& model, const Vec& s);

/// Approximate density of the raw sum at s (Jacobian included).
double edgeworth_sum_density(const EdgeworthModel& model, const Vec& s);

/// Uniform tensor grid over [-half_width, half_width]^dim.
std::vector<Vec> uniform_grid(std::size_t dim, std::size_t points_per_axis = 241, double half_width = 6.0);
/// Standard Gaussian draws, used as the error grid when dim > 2.
std::vector<Vec> gaussian_grid(std::size_t dim, std::size_t count, std::uint64_t seed);
/// 241-point-per-axis grid on [-6, 6]^d for d <= 2, 10^5 Gaussian points otherwise.
std::vector<Vec> default_error_grid(std::size_t dim, std::uint64_t seed = 0);

using DensityFn = std::function<double(const Vec&)>;

/// max over grid of (1 + ||x||^4) |exact(x) - edgeworth_density(model, x)|.
double weighted_sup_error(const EdgeworthModel& model, const DensityFn& exact, std::span<const Vec> grid,
                          Exec exec = Exec::Parallel);

} // namespace gibbs

#endif
