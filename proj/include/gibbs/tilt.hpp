#ifndef GIBBS_TILT_HPP
#define GIBBS_TILT_HPP

#include <cstddef>
#include <span>

#include "gibbs/family.hpp"

namespace gibbs {

/// Averaged cumulant function kappa_bar_n = (1/n) sum_j kappa_j and its first
/// two derivatives.
struct MeanCgf {
    double value;
    Vec grad;
    Mat hess;
};

MeanCgf mean_cgf(std::span<const FamilyMember> members, const Vec& theta);

/// Solution of grad kappa_bar_n(theta) = a.
struct TiltingSolution {
    Vec theta;
    double residual_norm;  // ||grad kappa_bar_n(theta) - a||
    std::size_t iterations;
    bool converged;
};

struct TiltOptions {
    double tol = 1e-10;
    std::size_t max_iter = 100;
};

/// True iff theta is strictly inside the common domain of all members.
bool in_common_domain(std::span<const FamilyMember> members, const Vec& theta);

/// Throws DomainError unless `a` is in the interior of the convex support
/// hull (Gamma: a > 0; Normal: any finite vector of the right size).
void require_interior_mean(std::span<const FamilyMember> members, const Vec& a);

/// Damped Newton on F(theta) = grad kappa_bar_n(theta) - a, started at 0, with
/// step halving until the iterate is in-domain and 0.5 ||F||^2 decreases.
TiltingSolution solve_tilt(std::span<const FamilyMember> members, const Vec& a, const TiltOptions& opts = {});

/// Closed-form tilt: Normal -> Gamma_bar^{-1} (a - mu_bar); Gamma sharing a
/// scale t -> 1/t - k_bar/a.
Vec tilt_oracle(std::span<const FamilyMember> members, const Vec& a);

/// Shape envelope k_- <= k_j <= k_+ with common scale t, defining
/// f_pm(theta) = k_pm t / (1 - theta t).
struct GammaEnvelope {
    double shape_minus;
    double shape_plus;
    double scale;

    [[nodiscard]] double lower(double theta) const { return shape_minus * scale / (1.0 - theta * scale); }
    [[nodiscard]] double upper(double theta) const { return shape_plus * scale / (1.0 - theta * scale); }
};

/// Tightest envelope for a Gamma sequence sharing one scale.
GammaEnvelope gamma_envelope(std::span<const FamilyMember> members);

struct ThetaInterval {
    double lower;
    double upper;
};

/// Bracket [(f_+)^{-1}(a), (f_-)^{-1}(a)] containing the 1-d tilt.
ThetaInterval theta_bounds_1d(const GammaEnvelope& env, double a);
ThetaInterval theta_bounds_1d(std::span<const FamilyMember> members, double a);

} // namespace gibbs

#endif
