#include "gibbs/family.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void require_dim(const FamilyMember& m, const Vec& v, const char* what)
{
    if (static_cast<std::size_t>(v.size()) != m.dim())
        throw DomainError(std::string(what) + ": dimension " + std::to_string(v.size()) +
                          " does not match member dimension " + std::to_string(m.dim()));
}

double gamma_log_density(double shape, double scale, double x)
{
    if (!(x > 0.0))
        return -std::numeric_limits<double>::infinity();
    return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
}

double marsaglia_tsang(double shape, double scale, RandomStream& rng)
{
    // shape > 2 by construction, so the shape >= 1 variant applies directly.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2)
            return d * v * scale;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return d * v * scale;
    }
}

} // namespace

bool DomainTheta::contains(const Vec& theta) const noexcept
{
    if (static_cast<std::size_t>(theta.size()) != dim_)
        return false;
    if (!theta.allFinite())
        return false;
    return !bounded_ || theta(0) < upper_;
}

FamilyMember FamilyMember::normal(Vec mean, Mat cov, std::size_t index)
{
    if (mean.size() == 0)
        throw DomainError("normal member: empty mean");
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw DomainError("normal member: covariance shape does not match mean");
    if (!mean.allFinite() || !cov.allFinite())
        throw DomainError("normal member: non-finite parameters");
    if (!is_symmetric(cov, 1e-12))
        throw DomainError("normal member: covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> eig(cov, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues()(0) > 0.0))
        throw DomainError("normal member: covariance is not positive definite");

    FamilyMember m;
    const Mat sym = 0.5 * (cov + cov.transpose());
    Eigen::LLT<Mat> llt(sym);
    if (llt.info() != Eigen::Success)
        throw DomainError("normal member: Cholesky factorization failed");
    m.chol_ = llt.matrixL();
    m.precision_ = llt.solve(Mat::Identity(sym.rows(), sym.cols()));
    const double log_det = 2.0 * m.chol_.diagonal().array().log().sum();
    m.log_norm_ = -0.5 * (static_cast<double>(mean.size()) * kLog2Pi + log_det);
    m.params_ = NormalParams{std::move(mean), sym};
    m.index_ = index;
    return m;
}

FamilyMember FamilyMember::normal(double mean, double variance, std::size_t index)
{
    return normal(scalar_vec(mean), scalar_mat(variance), index);
}

FamilyMember FamilyMember::gamma(double shape, double scale, std::size_t index)
{
    if (!(shape > 2.0) || !std::isfinite(shape))
        throw DomainError("gamma member: shape must be finite and > 2, got " + std::to_string(shape));
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw DomainError("gamma member: scale must be finite and > 0, got " + std::to_string(scale));
    FamilyMember m;
    m.params_ = GammaParams{shape, scale};
    m.index_ = index;
    return m;
}

FamilyKind FamilyMember::kind() const noexcept
{
    return std::holds_alternative<NormalParams>(params_) ? FamilyKind::Normal : FamilyKind::Gamma;
}

std::size_t FamilyMember::dim() const noexcept
{
    if (const auto* n = std::get_if<NormalParams>(&params_))
        return static_cast<std::size_t>(n->mean.size());
    return 1;
}

DomainTheta FamilyMember::domain() const
{
    if (kind() == FamilyKind::Normal)
        return DomainTheta::all_space(dim());
    return DomainTheta::half_line(1.0 / gamma_params().scale);
}

const FamilyMember::NormalParams& FamilyMember::normal_params() const
{
    if (const auto* n = std::get_if<NormalParams>(&params_))
        return *n;
    throw UnsupportedError("member is not Normal");
}

const FamilyMember::GammaParams& FamilyMember::gamma_params() const
{
    if (const auto* g = std::get_if<GammaParams>(&params_))
        return *g;
    throw UnsupportedError("member is not Gamma");
}

FamilyMember FamilyMember::with_index(std::size_t index) const
{
    FamilyMember copy = *this;
    copy.index_ = index;
    return copy;
}

bool operator==(const FamilyMember& a, const FamilyMember& b)
{
    if (a.kind() != b.kind() || a.index_ != b.index_)
        return false;
    if (a.kind() == FamilyKind::Gamma) {
        const auto& ga = a.gamma_params();
        const auto& gb = b.gamma_params();
        return ga.shape == gb.shape && ga.scale == gb.scale;
    }
    const auto& na = a.normal_params();
    const auto& nb = b.normal_params();
    return na.mean.size() == nb.mean.size() && na.mean == nb.mean && na.cov == nb.cov;
}

void require_in_domain(const FamilyMember& m, const Vec& theta)
{
    require_dim(m, theta, "theta");
    if (!m.domain().contains(theta)) {
        std::string msg = "theta outside the interior of the cgf domain";
        if (m.kind() == FamilyKind::Gamma)
            msg += " (theta = " + std::to_string(theta(0)) + ", must be < " + std::to_string(m.domain().upper()) + ")";
        throw DomainError(msg);
    }
}

void require_common_family(std::span<const FamilyMember> members)
{
    if (members.empty())
        throw DomainError("empty member list");
    const auto kind = members.front().kind();
    const auto dim = members.front().dim();
    for (const auto& m : members) {
        if (m.kind() != kind || m.dim() != dim)
            throw UnsupportedError("mixed-kind or mixed-dimension member sequences are not supported");
    }
}

double cgf(const FamilyMember& m, const Vec& theta)
{
    require_in_domain(m, theta);
    if (m.kind() == FamilyKind::Normal) {
        const auto& p = m.normal_params();
        return p.mean.dot(theta) + 0.5 * theta.dot(p.cov * theta);
    }
    const auto& g = m.gamma_params();
    return -g.shape * std::log1p(-theta(0) * g.scale);
}

Vec cgf_grad(const FamilyMember& m, const Vec& theta)
{
    require_in_domain(m, theta);
    if (m.kind() == FamilyKind::Normal) {
        const auto& p = m.normal_params();
        return p.mean + p.cov * theta;
    }
    const auto& g = m.gamma_params();
    return scalar_vec(g.shape * g.scale / (1.0 - theta(0) * g.scale));
}

Mat cgf_hess(const FamilyMember& m, const Vec& theta)
{
    require_in_domain(m, theta);
    if (m.kind() == FamilyKind::Normal)
        return m.normal_params().cov;
    const auto& g = m.gamma_params();
    const double s = g.scale / (1.0 - theta(0) * g.scale);
    return scalar_mat(g.shape * s * s);
}

double log_density(const FamilyMember& m, const Vec& x)
{
    require_dim(m, x, "x");
    if (m.kind() == FamilyKind::Normal) {
        const Vec z = x - m.normal_params().mean;
        return m.normal_log_norm() - 0.5 * z.dot(m.normal_precision() * z);
    }
    const auto& g = m.gamma_params();
    return gamma_log_density(g.shape, g.scale, x(0));
}

double density(const FamilyMember& m, const Vec& x)
{
    return std::exp(log_density(m, x));
}

Vec density_gradient(const FamilyMember& m, const Vec& x)
{
    const double p = density(m, x);
    if (m.kind() == FamilyKind::Normal)
        return -p * (m.normal_precision() * (x - m.normal_params().mean));
    if (!(x(0) > 0.0))
        return scalar_vec(0.0);
    const auto& g = m.gamma_params();
    return scalar_vec(p * ((g.shape - 1.0) / x(0) - 1.0 / g.scale));
}

FamilyMember tilt_member(const FamilyMember& m, const Vec& theta)
{
    require_in_domain(m, theta);
    if (m.kind() == FamilyKind::Normal) {
        const auto& p = m.normal_params();
        return FamilyMember::normal(p.mean + p.cov * theta, p.cov, m.index());
    }
    const auto& g = m.gamma_params();
    return FamilyMember::gamma(g.shape, g.scale / (1.0 - theta(0) * g.scale), m.index());
}

Vec draw(const FamilyMember& m, RandomStream& rng)
{
    if (m.kind() == FamilyKind::Gamma)
        return scalar_vec(draw_scalar(m, rng));
    const auto& p = m.normal_params();
    Vec z(p.mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
        z(i) = rng.normal();
    return p.mean + m.normal_chol() * z;
}

double draw_scalar(const FamilyMember& m, RandomStream& rng)
{
    if (m.dim() != 1)
        throw UnsupportedError("draw_scalar requires a one-dimensional member");
    if (m.kind() == FamilyKind::Gamma) {
        const auto& g = m.gamma_params();
        return marsaglia_tsang(g.shape, g.scale, rng);
    }
    return m.normal_params().mean(0) + m.normal_chol()(0, 0) * rng.normal();
}

std::vector<Vec> sample(const FamilyMember& m, RandomStream& rng, std::size_t count)
{
    std::vector<Vec> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(draw(m, rng));
    return out;
}

std::vector<double> third_central_moment(const FamilyMember& m)
{
    const std::size_t d = m.dim();
    std::vector<double> t(d * d * d, 0.0);
    if (m.kind() == FamilyKind::Gamma) {
        const auto& g = m.gamma_params();
        t[0] = 2.0 * g.shape * g.scale * g.scale * g.scale;
    }
    return t;
}

double fourth_central_abs_moment(const FamilyMember& m)
{
    if (m.kind() == FamilyKind::Normal) {
        const Mat& c = m.normal_params().cov;
        const double tr = c.trace();
        return tr * tr + 2.0 * (c * c).trace();
    }
    const auto& g = m.gamma_params();
    const double s2 = g.scale * g.scale;
    return 3.0 * g.shape * (g.shape + 2.0) * s2 * s2;
}

double cf_modulus(const FamilyMember& m, const Vec& t)
{
    require_dim(m, t, "t");
    if (m.kind() == FamilyKind::Normal)
        return std::exp(-0.5 * t.dot(m.normal_params().cov * t));
    const auto& g = m.gamma_params();
    const double st = g.scale * t(0);
    return std::pow(1.0 + st * st, -0.5 * g.shape);
}

Vec density_partial_l1(const FamilyMember& m)
{
    if (m.kind() == FamilyKind::Normal) {
        // d p / d x_l = -(P (x - mu))_l p(x) and (P Y)_l ~ N(0, P_ll).
        return (std::sqrt(2.0 / std::numbers::pi) * m.normal_precision().diagonal().array().sqrt()).matrix();
    }
    // Unimodal with p(0) = p(inf) = 0: total variation of p is twice the mode value.
    const auto& g = m.gamma_params();
    const double mode = (g.shape - 1.0) * g.scale;
    return scalar_vec(2.0 * std::exp(gamma_log_density(g.shape, g.scale, mode)));
}

} // namespace gibbs
