#ifndef GIBBS_VALIDATE_HPP
#define GIBBS_VALIDATE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gibbs/exec.hpp"
#include "gibbs/family.hpp"
#include "gibbs/tilt.hpp"

namespace gibbs {

/// Compact box K = [lower, upper] strictly inside Theta.
struct ThetaBox {
    Vec lower;
    Vec upper;
};

/// Bounding box of observed tilts, inflated by 20% and clipped a margin
/// inside the boundary of Theta.
ThetaBox make_theta_box(std::span<const FamilyMember> members, std::span<const Vec> thetas, double inflate = 0.2,
                        double boundary_margin = 1e-3);

/// Tensor grid over the box with `points` per axis. Throws DomainError if a
/// grid point is not strictly inside Theta.
std::vector<Vec> theta_grid(std::span<const FamilyMember> members, const ThetaBox& box, std::size_t points);

struct AssumptionEntry {
    std::string name;
    bool passed = false;
    double witness1 = 0.0;
    double witness2 = 0.0;
    std::string note;
};

struct AssumptionReport {
    std::vector<AssumptionEntry> entries;
    ThetaBox box;

    [[nodiscard]] bool all_passed() const;
};

struct CheckOptions {
    std::size_t theta_points = 33;
    std::size_t t_points = 512;
    double am4_ceiling = 1e9;
    double l1_ceiling = 1e6;  // finiteness ceiling for the density-partial L1 norms
    double cf_r_min = 1.0;    // R_K
    double cf_t_max = 100.0;  // T_max
    double beta = 0.5;
    Exec exec = Exec::Parallel;
};

/// (Cv): 0 < min lambda_min(C_j^theta) <= max lambda_max(C_j^theta) < inf.
/// witness1 = min eigenvalue, witness2 = max eigenvalue.
AssumptionEntry check_cv(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts = {});

/// (AM4): sup E||X_j^theta - m_j(theta)||^4 below the ceiling. witness1 = sup.
AssumptionEntry check_am4(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts = {});

/// (Cf1)/(Cf2) through the Fourier-decay bound |xi(t)| <= C_K / ||t||.
/// witness1 = C_K, witness2 = max over the t-grid of |xi(t)| ||t|| / C_K.
AssumptionEntry check_cf_decay(std::span<const FamilyMember> members, const ThetaBox& box,
                               const CheckOptions& opts = {});

/// (Cf3): eps = sup_{||t|| > beta} |xi(t)| < 1. witness1 = eps, witness2 = beta.
AssumptionEntry check_cf3(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts = {});

/// (Uf), d = 1: f_-(theta) <= m_j(theta) <= f_+(theta) on the theta grid.
/// witness1 = worst margin, witness2 = number of violating (j, theta) pairs.
AssumptionEntry check_uf(std::span<const FamilyMember> members, const ThetaBox& box, const GammaEnvelope& env,
                         const CheckOptions& opts = {});
AssumptionEntry check_uf(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts = {});

/// (Supp): common support, enforced by requiring a single family kind.
AssumptionEntry check_supp(std::span<const FamilyMember> members);

/// All checks applicable to the sequence; (Uf) only for 1-d Gamma.
AssumptionReport check_all(std::span<const FamilyMember> members, const ThetaBox& box, const CheckOptions& opts = {},
                           const std::optional<GammaEnvelope>& env = std::nullopt);

/// Members with identical parameters collapsed (index ignored).
std::vector<FamilyMember> distinct_members(std::span<const FamilyMember> members);

} // namespace gibbs

#endif
