#include "gibbs/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Evaluates f at every grid point (in parallel or serially) into a vector;
// reductions over it happen afterwards in grid order.
template <class T, class F>
std::vector<T> map_grid(std::span<const Vec> grid, Exec exec, F&& f)
{
    std::vector<T> out(grid.size());
    const auto n = static_cast<std::ptrdiff_t>(grid.size());
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = f(grid[static_cast<std::size_t>(i)]);
    } else {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = f(grid[static_cast<std::size_t>(i)]);
    }
    return out;
}

// Unit directions used to probe |xi(t)|: the coordinate axes and the main diagonal.
std::vector<Vec> probe_directions(std::size_t d)
{
    std::vector<Vec> dirs;
    for (std::size_t i = 0; i < d; ++i)
        dirs.push_back(Vec::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)));
    if (d > 1)
        dirs.push_back(Vec::Ones(static_cast<Eigen::Index>(d)) / std::sqrt(static_cast<double>(d)));
    return dirs;
}

std::vector<double> radii(double lo, double hi, std::size_t points)
{
    std::vector<double> r(points);
    for (std::size_t i = 0; i < points; ++i)
        r[i] = (points == 1) ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return r;
}

double sup_partial_l1(std::span<const FamilyMember> distinct, std::span<const Vec> grid, Exec exec)
{
    const auto per_point = map_grid<double>(grid, exec, [&](const Vec& theta) {
        double c = 0.0;
        for (const auto& m : distinct)
            c = std::max(c, density_partial_l1(tilt_member(m, theta)).maxCoeff());
        return c;
    });
    return *std::max_element(per_point.begin(), per_point.end());
}

} // namespace

bool AssumptionReport::all_passed() const
{
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

std::vector<FamilyMember> distinct_members(std::span<const FamilyMember> members)
{
    std::vector<FamilyMember> out;
    for (const auto& m : members) {
        const auto probe = m.with_index(0);
        if (std::none_of(out.begin(), out.end(), [&](const auto& o) { return o == probe; }))
            out.push_back(probe);
    }
    return out;
}

ThetaBox make_theta_box(std::span<const FamilyMember> members, std::span<const Vec> thetas, double inflate,
                        double boundary_margin)
{
    require_common_family(members);
    if (thetas.empty())
        throw DomainError("make_theta_box: no tilts given");
    Vec lo = thetas.front();
    Vec hi = thetas.front();
    for (const auto& t : thetas) {
        lo = lo.cwiseMin(t);
        hi = hi.cwiseMax(t);
    }
    const Vec center = 0.5 * (lo + hi);
    Vec half = 0.5 * (hi - lo);
    for (Eigen::Index i = 0; i < half.size(); ++i)
        half(i) = std::max(half(i), 1e-3 * (1.0 + std::abs(center(i))));
    half *= 1.0 + inflate;
    ThetaBox box{center - half, center + half};
    for (const auto& m : members) {
        const auto dom = m.domain();
        if (dom.bounded_above()) {
            box.upper(0) = std::min(box.upper(0), dom.upper() - boundary_margin);
            if (!(box.lower(0) < box.upper(0)))
                box.lower(0) = box.upper(0) - boundary_margin;
        }
    }
    return box;
}

std::vector<Vec> theta_grid(std::span<const FamilyMember> members, const ThetaBox& box, std::size_t points)
{
    require_common_family(members);
    const auto d = box.lower.size();
    if (box.upper.size() != d || static_cast<std::size_t>(d) != members.front().dim())
        throw DomainError("theta box has the wrong dimension");
    if (points == 0)
        throw DomainError("theta grid needs at least one point per axis");
    for (Eigen::Index i = 0; i < d; ++i)
        if (!(box.lower(i) <= box.upper(i)))
            throw DomainError("theta box has lower > upper");

    std::size_t total = 1;
    for (Eigen::Index i = 0; i < d; ++i)
        total *= points;
    std::vector<Vec> grid;
    grid.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Vec theta(d);
        std::size_t rem = flat;
        for (Eigen::Index i = d; i-- > 0;) {
            const auto step = static_cast<double>(rem % points);
            const double frac = points == 1 ? 0.5 : step / static_cast<double>(points - 1);
            theta(i) = box.lower(i) + frac * (box.upper(i) - box.lower(i));
            rem /= points;
        }
        if (!in_common_domain(members, theta))
            throw DomainError("theta grid point outside the interior of Theta");
        grid.push_back(std::move(theta));
    }
    return grid;
}

AssumptionEntry check_cv(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts)
{
    const auto distinct = distinct_members(members);
    const auto grid = theta_grid(members, box, opts.theta_points);
    struct Extremes {
        double lo = kInf;
        double hi = 0.0;
    };
    const auto per_point = map_grid<Extremes>(grid, opts.exec, [&](const Vec& theta) {
        Extremes e;
        for (const auto& m : distinct) {
            Eigen::SelfAdjointEigenSolver<Mat> eig(cgf_hess(m, theta), Eigen::EigenvaluesOnly);
            e.lo = std::min(e.lo, eig.eigenvalues()(0));
            e.hi = std::max(e.hi, eig.eigenvalues()(eig.eigenvalues().size() - 1));
        }
        return e;
    });
    Extremes all;
    for (const auto& e : per_point) {
        all.lo = std::min(all.lo, e.lo);
        all.hi = std::max(all.hi, e.hi);
    }
    AssumptionEntry entry{"Cv", false, all.lo, all.hi, "min/max eigenvalue of C_j^theta"};
    entry.passed = std::isfinite(all.hi) && all.lo > kSingularRatio * all.hi;
    return entry;
}

AssumptionEntry check_am4(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts)
{
    const auto distinct = distinct_members(members);
    const auto grid = theta_grid(members, box, opts.theta_points);
    const auto per_point = map_grid<double>(grid, opts.exec, [&](const Vec& theta) {
        double worst = 0.0;
        for (const auto& m : distinct)
            worst = std::max(worst, fourth_central_abs_moment(tilt_member(m, theta)));
        return worst;
    });
    const double sup = *std::max_element(per_point.begin(), per_point.end());
    AssumptionEntry entry{"AM4", false, sup, opts.am4_ceiling, "sup fourth central moment / ceiling"};
    entry.passed = std::isfinite(sup) && sup <= opts.am4_ceiling;
    return entry;
}

AssumptionEntry check_cf_decay(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts)
{
    const auto distinct = distinct_members(members);
    const auto grid = theta_grid(members, box, opts.theta_points);
    const double c_k = sup_partial_l1(distinct, grid, opts.exec);
    const auto dirs = probe_directions(members.front().dim());
    const auto rs = radii(opts.cf_r_min, opts.cf_t_max, opts.t_points);

    const auto per_point = map_grid<double>(grid, opts.exec, [&](const Vec& theta) {
        double worst = 0.0;
        for (const auto& m : distinct) {
            const auto tilted = tilt_member(m, theta);
            for (const auto& u : dirs)
                for (double r : rs)
                    worst = std::max(worst, cf_modulus(tilted, r * u) * r);
        }
        return worst;
    });
    const double worst = *std::max_element(per_point.begin(), per_point.end());
    AssumptionEntry entry{"Cf1", false, c_k, worst / c_k, "C_K and max |xi(t)| ||t|| / C_K (delta_K = 1)"};
    entry.passed = std::isfinite(c_k) && c_k <= opts.l1_ceiling && worst <= c_k;
    return entry;
}

AssumptionEntry check_cf3(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts)
{
    if (!(opts.beta > 0.0))
        throw DomainError("check_cf3: beta must be > 0");
    const auto distinct = distinct_members(members);
    const auto grid = theta_grid(members, box, opts.theta_points);
    const auto dirs = probe_directions(members.front().dim());
    const double t_max = std::max(opts.cf_t_max, opts.beta);
    const auto rs = radii(opts.beta, t_max, opts.t_points);

    const auto per_point = map_grid<double>(grid, opts.exec, [&](const Vec& theta) {
        double worst = 0.0;
        for (const auto& m : distinct) {
            const auto tilted = tilt_member(m, theta);
            for (const auto& u : dirs)
                for (double r : rs)
                    worst = std::max(worst, cf_modulus(tilted, r * u));
        }
        return worst;
    });
    double eps = *std::max_element(per_point.begin(), per_point.end());
    // Beyond T_max the Fourier-decay bound C_K / ||t|| takes over.
    eps = std::max(eps, sup_partial_l1(distinct, grid, opts.exec) / t_max);
    AssumptionEntry entry{"Cf3", false, eps, opts.beta, "eps_{K,beta} and beta"};
    entry.passed = eps < 1.0;
    return entry;
}

AssumptionEntry check_uf(std::span<const FamilyMember> members, const ThetaBox& box, const GammaEnvelope& env,
                         const CheckOptions& opts)
{
    require_common_family(members);
    if (members.front().kind() != FamilyKind::Gamma)
        throw UnsupportedError("check_uf: mean envelopes are only available for Gamma sequences");
    const auto distinct = distinct_members(members);
    const auto grid = theta_grid(members, box, opts.theta_points);
    struct Margin {
        double worst = kInf;
        double violations = 0.0;
    };
    const auto per_point = map_grid<Margin>(grid, opts.exec, [&](const Vec& theta) {
        Margin mg;
        const double lo = env.lower(theta(0));
        const double hi = env.upper(theta(0));
        for (const auto& m : distinct) {
            const double mean = cgf_grad(m, theta)(0);
            const double margin = std::min(mean - lo, hi - mean);
            mg.worst = std::min(mg.worst, margin);
            if (margin < -1e-12 * std::abs(mean))
                mg.violations += 1.0;
        }
        return mg;
    });
    Margin all;
    for (const auto& mg : per_point) {
        all.worst = std::min(all.worst, mg.worst);
        all.violations += mg.violations;
    }
    AssumptionEntry entry{"Uf", all.violations == 0.0, all.worst, all.violations,
                          "worst envelope margin and violation count"};
    return entry;
}

AssumptionEntry check_uf(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts)
{
    return check_uf(members, box, gamma_envelope(members), opts);
}

AssumptionEntry check_supp(std::span<const FamilyMember> members)
{
    require_common_family(members);
    return {"Supp", true, 0.0, 0.0, "common support by construction (single family kind)"};
}

AssumptionReport check_all(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts,
                           const std::optional<GammaEnvelope>& env)
{
    AssumptionReport report;
    report.box = box;
    report.entries.push_back(check_supp(members));
    report.entries.push_back(check_cv(members, box, opts));
    report.entries.push_back(check_am4(members, box, opts));
    report.entries.push_back(check_cf_decay(members, box, opts));
    report.entries.push_back(check_cf3(members, box, opts));
    if (members.front().kind() == FamilyKind::Gamma)
        report.entries.push_back(env ? check_uf(members, box, *env, opts) : check_uf(members, box, opts));
    return report;
}

} // namespace gibbs
