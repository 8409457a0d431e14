#ifndef GIBBS_CONDITIONAL_HPP
#define GIBBS_CONDITIONAL_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <utility>

#include "gibbs/edgeworth.hpp"
#include "gibbs/family.hpp"
#include "gibbs/tilt.hpp"

namespace gibbs {

/// Law of the closed-form sum of members tilted by theta, if one exists:
/// Normal(sum mu_j + (sum Gamma_j) theta, sum Gamma_j), or
/// Gamma(sum k_j, t / (1 - theta t)) for Gamma members sharing the scale t.
std::optional<FamilyMember> closed_form_sum(std::span<const FamilyMember> members, const Vec& theta);

/// Density of the closed-form sum law `law` expressed in the model's
/// normalized coordinate x = m^{-1/2} B (s - mean_sum).
double normalized_sum_density(const EdgeworthModel& model, const FamilyMember& law, const Vec& x);

/// Density of S^theta = sum_j X_j^theta, exact (closed form) or Edgeworth.
class SumDensity {
public:
    enum class Kind { ExactClosedForm, Edgeworth };

    /// Throws UnsupportedError when no closed form exists.
    static SumDensity exact(std::span<const FamilyMember> members, const Vec& theta);
    static SumDensity edgeworth(std::span<const FamilyMember> members, const Vec& theta, EdgeworthOrder order);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double log_density(const Vec& s) const;
    [[nodiscard]] double density(const Vec& s) const;
    [[nodiscard]] const Vec& mean() const noexcept { return mean_; }
    [[nodiscard]] const Mat& covariance() const noexcept { return cov_; }
    /// The closed-form law (ExactClosedForm only).
    [[nodiscard]] const FamilyMember& law() const;
    [[nodiscard]] const EdgeworthModel& model() const;

private:
    SumDensity() = default;
    Kind kind_ = Kind::ExactClosedForm;
    std::optional<FamilyMember> law_;
    std::optional<EdgeworthModel> model_;
    Vec mean_;
    Mat cov_;
};

/// Conditional density of (X_1, ..., X_k) given S_{1,n} = s, untilted:
///   prod_{j<=k} p_j(x_j) * p_{S_{k+1,n}}(s - sum x_j) / p_{S_{1,n}}(s).
/// n = members.size(); requires 1 <= k < n and x_block.size() == k.
double conditional_density(std::span<const FamilyMember> members, std::size_t k, std::span<const Vec> x_block,
                           const Vec& s);

/// Conditional density of S_{1,k} at t given S_{1,n} = s, with every member
/// tilted by theta (theta = 0 gives the untilted law).
double block_sum_conditional_density(std::span<const FamilyMember> members, std::size_t k, const Vec& s,
                                     const Vec& t, const Vec& theta);

/// (untilted, tilted) conditional densities of S_{1,k} at t given S_{1,n} = n a.
std::pair<double, double> tilting_invariance_check(std::span<const FamilyMember> members, std::size_t k,
                                                   const Vec& a, const Vec& t);

struct NormalizedCoords {
    Vec t_tilde;
    Vec t_sharp;
};

enum class RatioMethod { Exact, Edgeworth };

/// Precomputed split of X_1..X_n into the block 1..k and its complement
/// k+1..n under the tilt theta_n^a. Used for repeated ratio evaluations.
class BlockSplit {
public:
    BlockSplit(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const TiltOptions& opts = {});

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t k() const noexcept { return k_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] const Vec& a() const noexcept { return a_; }
    [[nodiscard]] const TiltingSolution& tilt() const noexcept { return tilt_; }
    [[nodiscard]] const Vec& theta() const noexcept { return tilt_.theta; }
    [[nodiscard]] bool has_closed_form() const noexcept { return block_ && rest_ && full_; }

    /// sum_{j<=k} m_j(theta), the mean of the tilted block sum.
    [[nodiscard]] const Vec& block_mean() const noexcept { return block_mean_; }
    [[nodiscard]] const Mat& block_cov() const noexcept { return block_cov_; }
    [[nodiscard]] const Mat& rest_cov() const noexcept { return rest_cov_; }
    [[nodiscard]] const Mat& full_cov() const noexcept { return full_cov_; }
    /// B~_{1,k} and B~_{k+1,n}.
    [[nodiscard]] const Mat& block_B() const noexcept { return block_B_; }
    [[nodiscard]] const Mat& rest_B() const noexcept { return rest_B_; }

    /// Closed-form laws of the tilted sums f_{1,k}, f_{k+1,n}, f_{1,n}.
    [[nodiscard]] const FamilyMember& block_law() const;
    [[nodiscard]] const FamilyMember& rest_law() const;
    [[nodiscard]] const FamilyMember& full_law() const;

    /// log f_{k+1,n}(n a - t) - log f_{1,n}(n a).
    [[nodiscard]] double log_ratio_exact(const Vec& t) const;
    [[nodiscard]] double ratio_exact(const Vec& t) const;
    /// det-ratio * g_{k+1,n}(t#) / g_{1,n}(0) with order-1 Edgeworth g's.
    [[nodiscard]] double ratio_edgeworth(const Vec& t) const;
    [[nodiscard]] double ratio(const Vec& t, RatioMethod method) const;

    /// det(Cov S~_{1,n})^{1/2} / det(Cov S~_{k+1,n})^{1/2}.
    [[nodiscard]] double det_ratio() const noexcept { return det_ratio_; }

    [[nodiscard]] NormalizedCoords coords(const Vec& t) const;

private:
    std::size_t n_;
    std::size_t k_;
    std::size_t dim_;
    Vec a_;
    TiltingSolution tilt_;
    Vec block_mean_;
    Mat block_cov_;
    Mat rest_cov_;
    Mat full_cov_;
    Mat block_B_;
    Mat rest_B_;
    double det_ratio_;
    std::optional<FamilyMember> block_;
    std::optional<FamilyMember> rest_;
    std::optional<FamilyMember> full_;
    double log_full_at_na_ = 0.0;
    EdgeworthModel rest_model_;
    EdgeworthModel full_model_;
    double g_full_at_zero_ = 0.0;
};

/// f_{k+1,n}(n a - t) / f_{1,n}(n a).
double density_ratio(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const Vec& t,
                     RatioMethod method);

NormalizedCoords normalized_coords(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const Vec& t);

/// p_{S_{1,k}}(x) exp(<theta, x>) / Phi_{1,k}(theta), untilted block sum density.
double gibbs_density(std::span<const FamilyMember> members, std::size_t k, const Vec& theta, const Vec& x);

} // namespace gibbs

#endif
