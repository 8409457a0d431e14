#include "gibbs/tv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "gibbs/error.hpp"
#include "gibbs/quadrature.hpp"

namespace gibbs {

namespace {

// Half-width, in block-sum standard deviations, of the Scheffe integration window.
constexpr double kWindowSd = 40.0;
constexpr std::size_t kRootScanPoints = 2048;
constexpr double kScheffeAbsTol = 1e-9;

struct BlockMoments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
};

// Chan et al. pairwise combination; applied in block order.
void combine(BlockMoments& acc, const BlockMoments& b)
{
    if (b.count == 0.0)
        return;
    const double total = acc.count + b.count;
    const double delta = b.mean - acc.mean;
    acc.mean += delta * b.count / total;
    acc.m2 += b.m2 + delta * delta * acc.count * b.count / total;
    acc.count = total;
}

BlockMoments run_block(const std::function<double(RandomStream&)>& score, std::size_t count, RandomStream rng)
{
    BlockMoments m;
    for (std::size_t i = 0; i < count; ++i) {
        const double v = score(rng);
        m.count += 1.0;
        const double delta = v - m.mean;
        m.mean += delta / m.count;
        m.m2 += delta * (v - m.mean);
    }
    return m;
}

std::vector<double> sign_changes(const std::function<double(double)>& f, double lo, double hi)
{
    std::vector<double> roots;
    const double h = (hi - lo) / static_cast<double>(kRootScanPoints);
    double x_prev = lo;
    double f_prev = f(lo);
    for (std::size_t i = 1; i <= kRootScanPoints; ++i) {
        const double x = (i == kRootScanPoints) ? hi : lo + h * static_cast<double>(i);
        const double fx = f(x);
        if (std::isfinite(f_prev) && std::isfinite(fx) && ((f_prev < 0.0) != (fx < 0.0))) {
            boost::math::tools::eps_tolerance<double> tol(50);
            std::uintmax_t max_iter = 200;
            const auto [a, b] = boost::math::tools::toms748_solve(f, x_prev, x, f_prev, fx, tol, max_iter);
            roots.push_back(0.5 * (a + b));
        }
        x_prev = x;
        f_prev = fx;
    }
    return roots;
}

} // namespace

std::string to_string(TVMethod m)
{
    switch (m) {
    case TVMethod::ScheffeQuadrature: return "scheffe";
    case TVMethod::SumMC: return "sum_mc";
    case TVMethod::JointMC: return "joint_mc";
    }
    return "unknown";
}

TVMethod parse_tv_method(const std::string& s)
{
    if (s == "scheffe")
        return TVMethod::ScheffeQuadrature;
    if (s == "sum_mc")
        return TVMethod::SumMC;
    if (s == "joint_mc")
        return TVMethod::JointMC;
    throw ConfigError("unknown TV method '" + s + "' (expected scheffe, sum_mc or joint_mc)");
}

MeanEstimate mc_mean(const std::function<double(RandomStream&)>& score, std::size_t samples, std::uint64_t seed,
                     Exec exec)
{
    if (samples == 0)
        throw DomainError("Monte Carlo estimate needs at least one sample");
    const RandomStream root(seed);
    const std::size_t blocks = (samples + kMCBlockSize - 1) / kMCBlockSize;
    std::vector<BlockMoments> parts(blocks);
    auto block_count = [&](std::size_t b) { return std::min(kMCBlockSize, samples - b * kMCBlockSize); };

    if (exec == Exec::Serial) {
        for (std::size_t b = 0; b < blocks; ++b)
            parts[b] = run_block(score, block_count(b), root.split(b));
    } else {
        const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t b = 0; b < nb; ++b) {
            const auto ub = static_cast<std::size_t>(b);
            parts[ub] = run_block(score, block_count(ub), root.split(ub));
        }
    }

    BlockMoments total;
    for (const auto& p : parts)
        combine(total, p);
    MeanEstimate out;
    out.mean = total.mean;
    out.std_error = total.count > 1.0 ? std::sqrt(total.m2 / (total.count - 1.0) / total.count) : 0.0;
    return out;
}

TVEstimate tv_scheffe(std::span<const FamilyMember> members, std::size_t k, const Vec& a)
{
    TVEstimate est;
    est.method = TVMethod::ScheffeQuadrature;
    est.n = members.size();
    est.k = k;
    est.a = a;
    if (k == 0)
        return est;
    require_common_family(members);
    if (members.front().dim() != 1)
        throw UnsupportedError("tv_scheffe: quadrature is implemented for d = 1 only");

    const BlockSplit split(members, k, a);
    if (!split.has_closed_form())
        throw UnsupportedError("tv_scheffe: requires closed-form sum densities");
    const FamilyMember& block = split.block_law();
    const bool gamma = block.kind() == FamilyKind::Gamma;
    const double na = a(0) * static_cast<double>(members.size());
    const double mu = split.block_mean()(0);
    const double sd = std::sqrt(split.block_cov()(0, 0));

    double lo = mu - kWindowSd * sd;
    const double hi = mu + kWindowSd * sd;
    if (gamma)
        lo = std::max(lo, 0.0);
    // The complement density f_{k+1,n}(na - t) vanishes for t >= na (Gamma).
    const double cut = gamma ? na : std::numeric_limits<double>::infinity();

    auto log_ratio = [&](double t) { return split.log_ratio_exact(scalar_vec(t)); };
    auto integrand = [&](double t) {
        const double lf = log_density(block, scalar_vec(t));
        if (!std::isfinite(lf))
            return 0.0;
        if (t >= cut)
            return std::exp(lf);
        return std::abs(std::expm1(log_ratio(t))) * std::exp(lf);
    };

    std::vector<double> breaks{lo};
    const double scan_hi = std::min(hi, cut);
    if (scan_hi > lo) {
        // Stop just short of the cut, where the log ratio is -inf.
        const double scan_end = (scan_hi == cut) ? std::nextafter(cut, lo) : scan_hi;
        for (double r : sign_changes(log_ratio, lo, scan_end))
            breaks.push_back(r);
    }
    if (cut > lo && cut < hi)
        breaks.push_back(cut);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());

    // Tighter relative tolerances chase roundoff in the log ratio and inflate the error estimate.
    const auto q = integrate_pieces(integrand, breaks, 1e-10, 15);
    if (!(q.error <= kScheffeAbsTol))
        throw NumericalError("tv_scheffe: quadrature did not converge (error estimate " + fmt::format("{:.3g}", q.error) +
                             ", value " + fmt::format("{:.6g}", q.value) + ")");
    est.value = q.value;
    return est;
}

TVEstimate tv_sum_mc(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const MCOptions& opts,
                     RatioMethod ratio)
{
    TVEstimate est;
    est.method = TVMethod::SumMC;
    est.samples = opts.samples;
    est.n = members.size();
    est.k = k;
    est.a = a;
    if (k == 0)
        return est;
    const BlockSplit split(members, k, a);

    std::vector<FamilyMember> tilted;
    for (std::size_t j = 0; j < k; ++j)
        tilted.push_back(tilt_member(members[j], split.theta()));
    const auto block_law = closed_form_sum(members.first(k), split.theta());

    auto draw_block_sum = [&](RandomStream& rng) {
        if (block_law)
            return draw(*block_law, rng);
        Vec s = draw(tilted.front(), rng);
        for (std::size_t j = 1; j < tilted.size(); ++j)
            s += draw(tilted[j], rng);
        return s;
    };
    std::function<double(RandomStream&)> score;
    if (ratio == RatioMethod::Exact) {
        score = [&](RandomStream& rng) { return std::abs(std::expm1(split.log_ratio_exact(draw_block_sum(rng)))); };
    } else {
        score = [&](RandomStream& rng) { return std::abs(split.ratio_edgeworth(draw_block_sum(rng)) - 1.0); };
    }
    const auto m = mc_mean(score, opts.samples, opts.seed, opts.exec);
    est.value = m.mean;
    est.std_error = m.std_error;
    return est;
}

TVEstimate tv_joint_mc(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const MCOptions& opts)
{
    TVEstimate est;
    est.method = TVMethod::JointMC;
    est.samples = opts.samples;
    est.n = members.size();
    est.k = k;
    est.a = a;
    if (k == 0)
        return est;
    const BlockSplit split(members, k, a);
    const Vec zero = Vec::Zero(a.size());
    const auto rest = closed_form_sum(members.subspan(k), zero);
    const auto full = closed_form_sum(members, zero);
    if (!rest || !full)
        throw UnsupportedError("tv_joint_mc: requires closed-form untilted sum densities");
    const Vec na = a * static_cast<double>(members.size());
    const double log_full = log_density(*full, na);
    if (!std::isfinite(log_full))
        throw DomainError("tv_joint_mc: p_{S_{1,n}}(n a) = 0");

    std::vector<FamilyMember> tilted;
    for (std::size_t j = 0; j < k; ++j)
        tilted.push_back(tilt_member(members[j], split.theta()));

    auto score = [&](RandomStream& rng) {
        Vec remainder = na;
        double log_q = -log_full;
        double log_p = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const Vec x = draw(tilted[j], rng);
            log_q += log_density(members[j], x);
            log_p += log_density(tilted[j], x);
            remainder -= x;
        }
        log_q += log_density(*rest, remainder);
        if (!std::isfinite(log_q))
            return 1.0;
        return std::abs(std::expm1(log_q - log_p));
    };
    const auto m = mc_mean(score, opts.samples, opts.seed, opts.exec);
    est.value = m.mean;
    est.std_error = m.std_error;
    return est;
}

double df_gamma_constant(std::size_t panels)
{
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto phi = [&](double z) { return inv_sqrt_2pi * std::exp(-0.5 * z * z); };
    const double inner = integrate_composite([&](double z) { return (1.0 - z * z) * phi(z); }, 0.0, 1.0, panels);
    const double outer = integrate_composite([&](double z) { return (z * z - 1.0) * phi(z); }, 1.0, 12.0, panels);
    return inner + outer;
}

} // namespace gibbs
