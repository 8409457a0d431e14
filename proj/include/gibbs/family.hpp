#ifndef GIBBS_FAMILY_HPP
#define GIBBS_FAMILY_HPP

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "gibbs/linalg.hpp"
#include "gibbs/rng.hpp"

namespace gibbs {

enum class FamilyKind { Normal, Gamma };

/// Natural domain Theta = {theta : Phi(theta) < infinity}.
/// Normal: all of R^d. Gamma(k, t): the half line (-inf, 1/t).
class DomainTheta {
public:
    static DomainTheta all_space(std::size_t dim) { return DomainTheta(dim, false, 0.0); }
    static DomainTheta half_line(double upper) { return DomainTheta(1, true, upper); }

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] bool bounded_above() const noexcept { return bounded_; }
    [[nodiscard]] double upper() const noexcept { return upper_; }

    /// Strict interior membership (dimension must match).
    [[nodiscard]] bool contains(const Vec& theta) const noexcept;

private:
    DomainTheta(std::size_t dim, bool bounded, double upper) : dim_(dim), bounded_(bounded), upper_(upper) {}
    std::size_t dim_;
    bool bounded_;
    double upper_;
};

/// One distribution X_j of the independent sequence. Immutable value type.
class FamilyMember {
public:
    struct NormalParams {
        Vec mean;
        Mat cov;
    };
    struct GammaParams {
        double shape;
        double scale;
    };

    /// Multivariate normal N(mean, cov); cov must be symmetric positive definite.
    static FamilyMember normal(Vec mean, Mat cov, std::size_t index = 0);
    static FamilyMember normal(double mean, double variance, std::size_t index = 0);
    /// Gamma(shape, scale) on (0, inf); requires shape > 2 and scale > 0.
    static FamilyMember gamma(double shape, double scale, std::size_t index = 0);

    [[nodiscard]] FamilyKind kind() const noexcept;
    [[nodiscard]] std::size_t dim() const noexcept;
    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] DomainTheta domain() const;

    [[nodiscard]] const NormalParams& normal_params() const;
    [[nodiscard]] const GammaParams& gamma_params() const;

    [[nodiscard]] FamilyMember with_index(std::size_t index) const;

    friend bool operator==(const FamilyMember& a, const FamilyMember& b);

    // Cached factorizations of the normal covariance.
    [[nodiscard]] const Mat& normal_chol() const { return chol_; }
    [[nodiscard]] const Mat& normal_precision() const { return precision_; }
    [[nodiscard]] double normal_log_norm() const { return log_norm_; }

private:
    FamilyMember() = default;

    std::variant<NormalParams, GammaParams> params_;
    std::size_t index_ = 0;
    Mat chol_;
    Mat precision_;
    double log_norm_ = 0.0;
};

using Members = std::vector<FamilyMember>;

/// kappa_j(theta) = log Phi_j(theta).
double cgf(const FamilyMember& m, const Vec& theta);
/// m_j(theta) = grad kappa_j(theta), the mean of the tilted member.
Vec cgf_grad(const FamilyMember& m, const Vec& theta);
/// C_j^theta = Hess kappa_j(theta), the covariance of the tilted member.
Mat cgf_hess(const FamilyMember& m, const Vec& theta);

double log_density(const FamilyMember& m, const Vec& x);
double density(const FamilyMember& m, const Vec& x);
/// Gradient of the density in x (zero outside the support).
Vec density_gradient(const FamilyMember& m, const Vec& x);

/// Member whose density is exp(<theta,x>) p(x) / Phi(theta).
FamilyMember tilt_member(const FamilyMember& m, const Vec& theta);

/// One draw (Box-Muller + Cholesky for Normal, Marsaglia-Tsang for Gamma).
Vec draw(const FamilyMember& m, RandomStream& rng);
/// Scalar fast path for one-dimensional members.
double draw_scalar(const FamilyMember& m, RandomStream& rng);
std::vector<Vec> sample(const FamilyMember& m, RandomStream& rng, std::size_t count);

/// Third central moment tensor E[Y_a Y_b Y_c], Y = X - E X, flattened
/// row-major with size dim^3.
std::vector<double> third_central_moment(const FamilyMember& m);
/// E ||X - E X||^4.
double fourth_central_abs_moment(const FamilyMember& m);
/// |E exp(i <t, X>)|.
double cf_modulus(const FamilyMember& m, const Vec& t);
/// L1 norms of the partial derivatives of the density, one per coordinate.
Vec density_partial_l1(const FamilyMember& m);

/// Throws DomainError unless theta lies strictly inside the member's domain.
void require_in_domain(const FamilyMember& m, const Vec& theta);
/// Throws unless all members share dimension and kind (common support).
void require_common_family(std::span<const FamilyMember> members);

} // namespace gibbs

#endif
