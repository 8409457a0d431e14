#ifndef GIBBS_SWEEP_HPP
#define GIBBS_SWEEP_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gibbs/config.hpp"
#include "gibbs/tv.hpp"

namespace gibbs {

/// Dispatches to tv_scheffe / tv_sum_mc / tv_joint_mc.
TVEstimate estimate_tv(std::span<const FamilyMember> members, std::size_t k, const Vec& a, TVMethod method,
                       RatioMethod ratio, std::size_t samples, std::uint64_t seed, Exec exec = Exec::Parallel);

struct ResultRow {
    std::size_t n = 0;
    std::size_t k = 0;
    Vec a;
    Vec theta;
    TVMethod method = TVMethod::ScheffeQuadrature;
    double tv = 0.0;
    double std_error = 0.0;
    double seconds = 0.0;
    bool ok = false;
    std::string error;
};

struct SweepOptions {
    int threads = 0;  // 0 keeps the OpenMP default (OMP_NUM_THREADS)
};

/// One row per (n, a) in declaration order (n outer). Rows run in an OpenMP
/// work pool; row r's Monte Carlo seed is RandomStream(seed).split(r).key(),
/// so results do not depend on scheduling or thread count. A failing row is
/// logged to stderr and marked !ok; the others still run.
std::vector<ResultRow> run_sweep(const ExperimentConfig& config, const SweepOptions& opts = {});

struct ScalingPoint {
    std::size_t n;
    std::size_t k;
    double tv;
};

/// OLS fit of log tv = exponent * log(k/n) + log_constant.
struct ScalingFit {
    double exponent = 0.0;
    double log_constant = 0.0;
    double r_squared = 0.0;
    std::vector<ScalingPoint> points;
};

/// Needs at least 3 successful rows with tv > 0 and two distinct k/n.
ScalingFit fit_scaling(std::span<const ResultRow> rows);
ScalingFit fit_scaling(std::span<const ScalingPoint> points);

/// results.csv: header `n,k,a,theta,method,tv,std_error,seconds`. The seconds
/// field is left empty unless with_timings, so the file is reproducible.
std::string format_results_csv(std::span<const ResultRow> rows, bool with_timings = false);
/// scaling.csv: header `n,k,log_k_over_n,log_tv,fitted_log_tv`.
std::string format_scaling_csv(std::span<const ResultRow> rows, const std::optional<ScalingFit>& fit);

/// Writes results.csv and scaling.csv into `dir` (created if missing). Each
/// file is written to a temporary name and renamed, so a failure leaves no
/// partial file. Throws std::runtime_error naming the path on I/O failure.
void emit_report(std::span<const ResultRow> rows, const std::optional<ScalingFit>& fit,
                 const std::filesystem::path& dir, bool with_timings = false);

/// Writes `content` to `path` atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace gibbs

#endif
