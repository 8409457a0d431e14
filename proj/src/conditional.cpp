#include "gibbs/conditional.hpp"

#include <cmath>
#include <limits>

#include "gibbs/error.hpp"

namespace gibbs {

namespace {

void require_split(std::span<const FamilyMember> members, std::size_t k)
{
    if (k == 0 || k >= members.size())
        throw DomainError("block size k must satisfy 1 <= k < n (n = " + std::to_string(members.size()) +
                          ", k = " + std::to_string(k) + ")");
}

FamilyMember require_closed_form(std::span<const FamilyMember> members, const Vec& theta)
{
    auto law = closed_form_sum(members, theta);
    if (!law)
        throw UnsupportedError("no closed-form sum density for this member sequence");
    return *law;
}

} // namespace

std::optional<FamilyMember> closed_form_sum(std::span<const FamilyMember> members, const Vec& theta)
{
    require_common_family(members);
    if (members.front().kind() == FamilyKind::Normal) {
        const auto d = static_cast<Eigen::Index>(members.front().dim());
        Vec mean = Vec::Zero(d);
        Mat cov = Mat::Zero(d, d);
        for (const auto& m : members) {
            require_in_domain(m, theta);
            mean += m.normal_params().mean;
            cov += m.normal_params().cov;
        }
        mean += cov * theta;
        return FamilyMember::normal(std::move(mean), std::move(cov));
    }
    const double t = members.front().gamma_params().scale;
    double shape = 0.0;
    for (const auto& m : members) {
        if (m.gamma_params().scale != t)
            return std::nullopt;
        shape += m.gamma_params().shape;
    }
    require_in_domain(members.front(), theta);
    return FamilyMember::gamma(shape, t / (1.0 - theta(0) * t));
}

double normalized_sum_density(const EdgeworthModel& model, const FamilyMember& law, const Vec& x)
{
    // s = mean_sum + sqrt(m) B^{-1} x, with Jacobian |det(sqrt(m) B^{-1})|.
    const double m = static_cast<double>(model.count);
    const Mat scale = std::sqrt(m) * model.B.inverse();
    const Vec s = model.mean_sum + scale * x;
    return std::abs(scale.determinant()) * density(law, s);
}

SumDensity SumDensity::exact(std::span<const FamilyMember> members, const Vec& theta)
{
    SumDensity sd;
    sd.kind_ = Kind::ExactClosedForm;
    sd.law_ = require_closed_form(members, theta);
    const Vec zero = Vec::Zero(theta.size());
    sd.mean_ = cgf_grad(*sd.law_, zero);
    sd.cov_ = cgf_hess(*sd.law_, zero);
    return sd;
}

SumDensity SumDensity::edgeworth(std::span<const FamilyMember> members, const Vec& theta, EdgeworthOrder order)
{
    SumDensity sd;
    sd.kind_ = Kind::Edgeworth;
    sd.model_ = build_model(members, theta, order);
    sd.mean_ = sd.model_->mean_sum;
    sd.cov_ = sd.model_->V * static_cast<double>(sd.model_->count);
    return sd;
}

double SumDensity::log_density(const Vec& s) const
{
    if (kind_ == Kind::ExactClosedForm)
        return gibbs::log_density(*law_, s);
    const double p = edgeworth_sum_density(*model_, s);
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

double SumDensity::density(const Vec& s) const
{
    if (kind_ == Kind::ExactClosedForm)
        return gibbs::density(*law_, s);
    return edgeworth_sum_density(*model_, s);
}

const FamilyMember& SumDensity::law() const
{
    if (!law_)
        throw UnsupportedError("SumDensity: not a closed-form density");
    return *law_;
}

const EdgeworthModel& SumDensity::model() const
{
    if (!model_)
        throw UnsupportedError("SumDensity: not an Edgeworth density");
    return *model_;
}

double conditional_density(std::span<const FamilyMember> members, std::size_t k, std::span<const Vec> x_block,
                           const Vec& s)
{
    require_split(members, k);
    if (x_block.size() != k)
        throw DomainError("conditional_density: x_block must hold exactly k vectors");
    const Vec zero = Vec::Zero(s.size());
    const auto full = require_closed_form(members, zero);
    const auto rest = require_closed_form(members.subspan(k), zero);

    const double log_full = log_density(full, s);
    if (!std::isfinite(log_full))
        throw DomainError("conditional_density: p_{S_{1,n}}(s) = 0, conditional law undefined at s");
    Vec remainder = s;
    double log_num = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        log_num += log_density(members[j], x_block[j]);
        remainder -= x_block[j];
    }
    log_num += log_density(rest, remainder);
    if (!std::isfinite(log_num))
        return 0.0;
    return std::exp(log_num - log_full);
}

double block_sum_conditional_density(std::span<const FamilyMember> members, std::size_t k, const Vec& s,
                                     const Vec& t, const Vec& theta)
{
    require_split(members, k);
    const auto full = require_closed_form(members, theta);
    const auto block = require_closed_form(members.first(k), theta);
    const auto rest = require_closed_form(members.subspan(k), theta);
    const double log_full = log_density(full, s);
    if (!std::isfinite(log_full))
        throw DomainError("block_sum_conditional_density: p_{S_{1,n}}(s) = 0, conditional law undefined at s");
    const double log_num = log_density(block, t) + log_density(rest, s - t);
    if (!std::isfinite(log_num))
        return 0.0;
    return std::exp(log_num - log_full);
}

std::pair<double, double> tilting_invariance_check(std::span<const FamilyMember> members, std::size_t k,
                                                   const Vec& a, const Vec& t)
{
    require_split(members, k);
    const auto sol = solve_tilt(members, a);
    if (!sol.converged)
        throw NumericalError("tilting_invariance_check: tilt solver did not converge");
    const Vec s = a * static_cast<double>(members.size());
    const Vec zero = Vec::Zero(a.size());
    return {block_sum_conditional_density(members, k, s, t, zero),
            block_sum_conditional_density(members, k, s, t, sol.theta)};
}

BlockSplit::BlockSplit(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const TiltOptions& opts)
    : n_(members.size()), k_(k), dim_(0), a_(a)
{
    require_split(members, k);
    dim_ = members.front().dim();
    tilt_ = solve_tilt(members, a, opts);
    if (!tilt_.converged)
        throw NumericalError("BlockSplit: tilt solver did not converge (residual " +
                             std::to_string(tilt_.residual_norm) + ")");
    const Vec& theta = tilt_.theta;
    const auto d = static_cast<Eigen::Index>(dim_);

    block_mean_ = Vec::Zero(d);
    block_cov_ = Mat::Zero(d, d);
    rest_cov_ = Mat::Zero(d, d);
    for (std::size_t j = 0; j < n_; ++j) {
        const Mat c = cgf_hess(members[j], theta);
        if (j < k_) {
            block_mean_ += cgf_grad(members[j], theta);
            block_cov_ += c;
        } else {
            rest_cov_ += c;
        }
    }
    full_cov_ = block_cov_ + rest_cov_;
    block_B_ = spd_inv_sqrt(block_cov_ / static_cast<double>(k_));
    rest_B_ = spd_inv_sqrt(rest_cov_ / static_cast<double>(n_ - k_));
    det_ratio_ = std::exp(0.5 * (spd_log_det(full_cov_) - spd_log_det(rest_cov_)));

    block_ = closed_form_sum(members.first(k_), theta);
    rest_ = closed_form_sum(members.subspan(k_), theta);
    full_ = closed_form_sum(members, theta);
    if (full_)
        log_full_at_na_ = log_density(*full_, a_ * static_cast<double>(n_));

    rest_model_ = build_model(members.subspan(k_), theta, EdgeworthOrder::One);
    full_model_ = build_model(members, theta, EdgeworthOrder::One);
    g_full_at_zero_ = edgeworth_density(full_model_, Vec::Zero(d));
}

const FamilyMember& BlockSplit::block_law() const
{
    if (!block_)
        throw UnsupportedError("no closed-form block sum law");
    return *block_;
}

const FamilyMember& BlockSplit::rest_law() const
{
    if (!rest_)
        throw UnsupportedError("no closed-form complement sum law");
    return *rest_;
}

const FamilyMember& BlockSplit::full_law() const
{
    if (!full_)
        throw UnsupportedError("no closed-form total sum law");
    return *full_;
}

double BlockSplit::log_ratio_exact(const Vec& t) const
{
    if (!rest_ || !full_)
        throw UnsupportedError("exact density ratio requires closed-form sum laws");
    if (!std::isfinite(log_full_at_na_))
        throw DomainError("f_{1,n}(n a) = 0: density ratio undefined");
    return log_density(*rest_, a_ * static_cast<double>(n_) - t) - log_full_at_na_;
}

double BlockSplit::ratio_exact(const Vec& t) const
{
    return std::exp(log_ratio_exact(t));
}

double BlockSplit::ratio_edgeworth(const Vec& t) const
{
    const auto c = coords(t);
    return det_ratio_ * edgeworth_density(rest_model_, c.t_sharp) / g_full_at_zero_;
}

double BlockSplit::ratio(const Vec& t, RatioMethod method) const
{
    return method == RatioMethod::Exact ? ratio_exact(t) : ratio_edgeworth(t);
}

NormalizedCoords BlockSplit::coords(const Vec& t) const
{
    const Vec centered = t - block_mean_;
    return {block_B_ * centered / std::sqrt(static_cast<double>(k_)),
            -(rest_B_ * centered) / std::sqrt(static_cast<double>(n_ - k_))};
}

double density_ratio(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const Vec& t,
                     RatioMethod method)
{
    return BlockSplit(members, k, a).ratio(t, method);
}

NormalizedCoords normalized_coords(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const Vec& t)
{
    return BlockSplit(members, k, a).coords(t);
}

double gibbs_density(std::span<const FamilyMember> members, std::size_t k, const Vec& theta, const Vec& x)
{
    if (k == 0 || k > members.size())
        throw DomainError("gibbs_density: need 1 <= k <= n");
    const auto block = members.first(k);
    const auto untilted = require_closed_form(block, Vec::Zero(theta.size()));
    double log_phi = 0.0;
    for (const auto& m : block)
        log_phi += cgf(m, theta);
    const double lp = log_density(untilted, x);
    if (!std::isfinite(lp))
        return 0.0;
    return std::exp(lp + theta.dot(x) - log_phi);
}

} // namespace gibbs
