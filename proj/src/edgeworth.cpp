#include "gibbs/edgeworth.hpp"

#include <algorithm>
#include <cmath>

#include <array>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void enumerate(std::size_t pos, unsigned remaining, MultiIndex& cur, std::vector<MultiIndex>& out)
{
    if (pos + 1 == cur.size()) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
    }
    for (unsigned v = 0; v <= remaining; ++v) {
        cur[pos] = v;
        enumerate(pos + 1, remaining - v, cur, out);
    }
}

double hermite_1d(unsigned order, double u)
{
    switch (order) {
    case 0: return 1.0;
    case 1: return u;
    case 2: return u * u - 1.0;
    case 3: return u * (u * u - 3.0);
    default: throw DomainError("hermite order above 3");
    }
}

unsigned weight(const MultiIndex& nu)
{
    unsigned w = 0;
    for (auto v : nu)
        w += v;
    return w;
}

// nu = (2, 1) -> coordinate triple (0, 0, 1).
std::array<std::size_t, 3> coordinate_triple(const MultiIndex& nu)
{
    std::array<std::size_t, 3> idx{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < nu.size(); ++i)
        for (unsigned r = 0; r < nu[i]; ++r)
            idx[pos++] = i;
    return idx;
}

} // namespace

std::vector<MultiIndex> weight3_indices(std::size_t dim)
{
    if (dim == 0)
        throw DomainError("weight3_indices: dimension must be >= 1");
    std::vector<MultiIndex> out;
    MultiIndex cur(dim, 0);
    enumerate(0, 3, cur, out);
    return out;
}

double multi_factorial(const MultiIndex& nu)
{
    double f = 1.0;
    for (auto v : nu)
        for (unsigned i = 2; i <= v; ++i)
            f *= i;
    return f;
}

CumulantMap third_cumulant(const FamilyMember& member, const Vec& theta, const Mat& B)
{
    const std::size_t d = member.dim();
    if (static_cast<std::size_t>(B.rows()) != d || static_cast<std::size_t>(B.cols()) != d)
        throw DomainError("third_cumulant: B has the wrong shape");
    const auto tilted = tilt_member(member, theta);
    const auto T = third_central_moment(tilted);
    const bool zero = std::all_of(T.begin(), T.end(), [](double v) { return v == 0.0; });

    CumulantMap out;
    for (const auto& nu : weight3_indices(d)) {
        if (zero) {
            out.emplace(nu, 0.0);
            continue;
        }
        const auto [i1, i2, i3] = coordinate_triple(nu);
        double acc = 0.0;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                for (std::size_t c = 0; c < d; ++c)
                    acc += B(i1, a) * B(i2, b) * B(i3, c) * T[(a * d + b) * d + c];
        out.emplace(nu, acc);
    }
    return out;
}

EdgeworthModel build_model(std::span<const FamilyMember> members, const Vec& theta, EdgeworthOrder order)
{
    require_common_family(members);
    const std::size_t d = members.front().dim();
    const auto di = static_cast<Eigen::Index>(d);

    EdgeworthModel model;
    model.dim = d;
    model.count = members.size();
    model.order = order;
    model.mean_sum = Vec::Zero(di);
    model.V = Mat::Zero(di, di);
    for (const auto& m : members) {
        model.mean_sum += cgf_grad(m, theta);
        model.V += cgf_hess(m, theta);
    }
    model.V /= static_cast<double>(members.size());
    model.B = spd_inv_sqrt(model.V);

    for (const auto& nu : weight3_indices(d))
        model.avg_third_cumulants.emplace(nu, 0.0);
    if (order == EdgeworthOrder::One) {
        for (const auto& m : members) {
            for (const auto& [nu, v] : third_cumulant(m, theta, model.B))
                model.avg_third_cumulants[nu] += v;
        }
        for (auto& [nu, v] : model.avg_third_cumulants)
            v /= static_cast<double>(members.size());
    }
    return model;
}

double hermite3(const MultiIndex& nu, const Vec& x)
{
    if (weight(nu) != 3)
        throw DomainError("hermite3: multi-index weight must be 3");
    if (static_cast<std::size_t>(x.size()) != nu.size())
        throw DomainError("hermite3: dimension mismatch");
    double h = 1.0;
    for (std::size_t i = 0; i < nu.size(); ++i)
        h *= hermite_1d(nu[i], x(static_cast<Eigen::Index>(i)));
    return h;
}

double correction_polynomial(const EdgeworthModel& model, const Vec& x)
{
    double p = 0.0;
    for (const auto& [nu, chi] : model.avg_third_cumulants) {
        if (chi != 0.0)
            p += chi / multi_factorial(nu) * hermite3(nu, x);
    }
    return p;
}

double std_normal_density(const Vec& x)
{
    return std::exp(-0.5 * (static_cast<double>(x.size()) * kLog2Pi + x.squaredNorm()));
}

double edgeworth_density(const EdgeworthModel& model, const Vec& x)
{
    const double phi = std_normal_density(x);
    if (model.order == EdgeworthOrder::Zero)
        return phi;
    return phi * (1.0 + correction_polynomial(model, x) / std::sqrt(static_cast<double>(model.count)));
}

Vec normalize(const EdgeworthModel& model, const Vec& s)
{
    return model.B * (s - model.mean_sum) / std::sqrt(static_cast<double>(model.count));
}

double edgeworth_sum_density(const EdgeworthModel& model, const Vec& s)
{
    const double m = static_cast<double>(model.count);
    const double jac = model.B.determinant() * std::pow(m, -0.5 * static_cast<double>(model.dim));
    return jac * edgeworth_density(model, normalize(model, s));
}

std::vector<Vec> uniform_grid(std::size_t dim, std::size_t points_per_axis, double half_width)
{
    if (dim == 0 || points_per_axis < 2)
        throw DomainError("uniform_grid: need dim >= 1 and at least 2 points per axis");
    std::size_t total = 1;
    for (std::size_t i = 0; i < dim; ++i)
        total *= points_per_axis;
    const double h = 2.0 * half_width / static_cast<double>(points_per_axis - 1);
    std::vector<Vec> grid;
    grid.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Vec x(static_cast<Eigen::Index>(dim));
        std::size_t rem = flat;
        for (std::size_t i = dim; i-- > 0;) {
            x(static_cast<Eigen::Index>(i)) = -half_width + h * static_cast<double>(rem % points_per_axis);
            rem /= points_per_axis;
        }
        grid.push_back(std::move(x));
    }
    return grid;
}

std::vector<Vec> gaussian_grid(std::size_t dim, std::size_t count, std::uint64_t seed)
{
    RandomStream rng(seed);
    std::vector<Vec> grid;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vec x(static_cast<Eigen::Index>(dim));
        for (auto& v : x)
            v = rng.normal();
        grid.push_back(std::move(x));
    }
    return grid;
}

std::vector<Vec> default_error_grid(std::size_t dim, std::uint64_t seed)
{
    if (dim <= 2)
        return uniform_grid(dim);
    return gaussian_grid(dim, 100000, seed);
}

double weighted_sup_error(const EdgeworthModel& model, const DensityFn& exact, std::span<const Vec> grid, Exec exec)
{
    if (grid.empty())
        throw DomainError("weighted_sup_error: empty grid");
    const auto n = static_cast<std::ptrdiff_t>(grid.size());
    auto term = [&](std::ptrdiff_t i) {
        const Vec& x = grid[static_cast<std::size_t>(i)];
        const double r2 = x.squaredNorm();
        return (1.0 + r2 * r2) * std::abs(exact(x) - edgeworth_density(model, x));
    };
    double worst = 0.0;
    if (exec == Exec::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            worst = std::max(worst, term(i));
        return worst;
    }
#pragma omp parallel for reduction(max : worst) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        worst = std::max(worst, term(i));
    return worst;
}

} // namespace gibbs
