#ifndef GIBBS_TV_HPP
#define GIBBS_TV_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "gibbs/conditional.hpp"
#include "gibbs/exec.hpp"
#include "gibbs/family.hpp"

namespace gibbs {

enum class TVMethod { ScheffeQuadrature, SumMC, JointMC };

std::string to_string(TVMethod m);
TVMethod parse_tv_method(const std::string& s);

/// Total-variation distance ||Q_nak - P~_1^k|| in the Scheffe form
///   int |f_{k+1,n}(na - t) / f_{1,n}(na) - 1| f_{1,k}(t) dt.
struct TVEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 0 for quadrature
    TVMethod method = TVMethod::ScheffeQuadrature;
    std::size_t samples = 0;
    std::size_t n = 0;
    std::size_t k = 0;
    Vec a;
};

/// Deterministic quadrature; d = 1 and closed-form sum laws only. k = 0 gives 0.
TVEstimate tv_scheffe(std::span<const FamilyMember> members, std::size_t k, const Vec& a);

struct MCOptions {
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 0;
    Exec exec = Exec::Parallel;
};

/// Draws S~_{1,k} from the tilted block law and averages |ratio - 1|.
TVEstimate tv_sum_mc(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const MCOptions& opts,
                     RatioMethod ratio = RatioMethod::Exact);

/// Draws (X~_1, ..., X~_k) jointly and averages |q_nak(x) / p~_1^k(x) - 1|,
/// where q_nak is the untilted conditional density given S_{1,n} = n a.
TVEstimate tv_joint_mc(std::span<const FamilyMember> members, std::size_t k, const Vec& a, const MCOptions& opts);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Draw-and-score Monte Carlo kernel. The sample index range is cut into
/// fixed blocks, block b draws from RandomStream(seed).split(b), and block
/// sums are combined in block order, so the result does not depend on the
/// thread count. `score` receives the block's stream and returns one value.
MeanEstimate mc_mean(const std::function<double(RandomStream&)>& score, std::size_t samples, std::uint64_t seed,
                     Exec exec);

inline constexpr std::size_t kMCBlockSize = 1u << 14;

/// gamma = (1/2) E|1 - Z^2|, Z standard normal, by composite Gauss-Legendre
/// over [0, 1] and [1, 12] (kinks at |z| = 1).
double df_gamma_constant(std::size_t panels = 64);

} // namespace gibbs

#endif
