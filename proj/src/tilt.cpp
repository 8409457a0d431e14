#include "gibbs/tilt.hpp"

#include <algorithm>
#include <cmath>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

// Iterates must stay this far (relatively) inside a bounded domain.
constexpr double kBoundaryMargin = 1e-14;

double common_scale(std::span<const FamilyMember> members)
{
    const double t = members.front().gamma_params().scale;
    for (const auto& m : members) {
        if (m.gamma_params().scale != t)
            throw UnsupportedError("Gamma members with different scales have no closed-form tilt");
    }
    return t;
}

} // namespace

MeanCgf mean_cgf(std::span<const FamilyMember> members, const Vec& theta)
{
    require_common_family(members);
    const auto d = static_cast<Eigen::Index>(members.front().dim());
    MeanCgf out{0.0, Vec::Zero(d), Mat::Zero(d, d)};
    for (const auto& m : members) {
        out.value += cgf(m, theta);
        out.grad += cgf_grad(m, theta);
        out.hess += cgf_hess(m, theta);
    }
    const double inv_n = 1.0 / static_cast<double>(members.size());
    out.value *= inv_n;
    out.grad *= inv_n;
    out.hess *= inv_n;
    return out;
}

bool in_common_domain(std::span<const FamilyMember> members, const Vec& theta)
{
    for (const auto& m : members) {
        const auto dom = m.domain();
        if (!dom.contains(theta))
            return false;
        if (dom.bounded_above() && theta(0) >= dom.upper() - kBoundaryMargin * std::max(1.0, std::abs(dom.upper())))
            return false;
    }
    return true;
}

void require_interior_mean(std::span<const FamilyMember> members, const Vec& a)
{
    require_common_family(members);
    if (static_cast<std::size_t>(a.size()) != members.front().dim())
        throw DomainError("target mean has the wrong dimension");
    if (!a.allFinite())
        throw DomainError("target mean is not finite");
    if (members.front().kind() == FamilyKind::Gamma && !(a(0) > 0.0))
        throw DomainError("target mean must be > 0 for Gamma members (interior of the convex support)");
}

TiltingSolution solve_tilt(std::span<const FamilyMember> members, const Vec& a, const TiltOptions& opts)
{
    require_interior_mean(members, a);
    if (!(opts.tol > 0.0))
        throw DomainError("solve_tilt: tol must be > 0");

    Vec theta = Vec::Zero(a.size());
    MeanCgf cur = mean_cgf(members, theta);
    Vec residual = cur.grad - a;
    double merit = residual.squaredNorm();

    TiltingSolution sol{theta, std::sqrt(merit), 0, false};
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        if (std::sqrt(merit) <= opts.tol) {
            sol.converged = true;
            break;
        }
        const auto eig = spd_eig(cur.hess, "mean cgf Hessian");
        const Vec step = -(eig.vectors * (eig.values.cwiseInverse().asDiagonal() * (eig.vectors.transpose() * residual)));

        bool accepted = false;
        double lambda = 1.0;
        for (int halving = 0; halving < 80; ++halving, lambda *= 0.5) {
            const Vec cand = theta + lambda * step;
            if (!in_common_domain(members, cand))
                continue;
            MeanCgf next = mean_cgf(members, cand);
            Vec next_res = next.grad - a;
            const double next_merit = next_res.squaredNorm();
            if (next_merit < merit) {
                theta = cand;
                cur = std::move(next);
                residual = std::move(next_res);
                merit = next_merit;
                accepted = true;
                break;
            }
        }
        sol.iterations = it + 1;
        if (!accepted)
            break;  // stagnated at rounding level
    }
    if (!sol.converged && std::sqrt(merit) <= opts.tol)
        sol.converged = true;

    if (sol.converged) {
        // One polishing Newton step, kept only if it does not increase the residual.
        const auto eig = spd_eig(cur.hess, "mean cgf Hessian");
        const Vec cand =
            theta - eig.vectors * (eig.values.cwiseInverse().asDiagonal() * (eig.vectors.transpose() * residual));
        if (in_common_domain(members, cand)) {
            const Vec next_res = mean_cgf(members, cand).grad - a;
            if (next_res.squaredNorm() <= merit) {
                theta = cand;
                merit = next_res.squaredNorm();
            }
        }
    }
    sol.theta = theta;
    sol.residual_norm = std::sqrt(merit);
    return sol;
}

Vec tilt_oracle(std::span<const FamilyMember> members, const Vec& a)
{
    require_interior_mean(members, a);
    if (members.front().kind() == FamilyKind::Normal) {
        const auto d = a.size();
        Vec mu_bar = Vec::Zero(d);
        Mat cov_bar = Mat::Zero(d, d);
        for (const auto& m : members) {
            mu_bar += m.normal_params().mean;
            cov_bar += m.normal_params().cov;
        }
        const double inv_n = 1.0 / static_cast<double>(members.size());
        mu_bar *= inv_n;
        cov_bar *= inv_n;
        spd_eig(cov_bar, "mean covariance");
        return cov_bar.ldlt().solve(a - mu_bar);
    }
    const double t = common_scale(members);
    double shape_sum = 0.0;
    for (const auto& m : members)
        shape_sum += m.gamma_params().shape;
    const double k_bar = shape_sum / static_cast<double>(members.size());
    return scalar_vec(1.0 / t - k_bar / a(0));
}

GammaEnvelope gamma_envelope(std::span<const FamilyMember> members)
{
    require_common_family(members);
    if (members.front().kind() != FamilyKind::Gamma)
        throw UnsupportedError("mean envelopes are only available for Gamma sequences");
    const double t = common_scale(members);
    GammaEnvelope env{members.front().gamma_params().shape, members.front().gamma_params().shape, t};
    for (const auto& m : members) {
        env.shape_minus = std::min(env.shape_minus, m.gamma_params().shape);
        env.shape_plus = std::max(env.shape_plus, m.gamma_params().shape);
    }
    return env;
}

ThetaInterval theta_bounds_1d(const GammaEnvelope& env, double a)
{
    if (!(a > 0.0))
        throw DomainError("theta_bounds_1d: a must be > 0");
    return {1.0 / env.scale - env.shape_plus / a, 1.0 / env.scale - env.shape_minus / a};
}

ThetaInterval theta_bounds_1d(std::span<const FamilyMember> members, double a)
{
    return theta_bounds_1d(gamma_envelope(members), a);
}

} // namespace gibbs
