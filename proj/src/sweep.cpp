#include "gibbs/sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <fmt/format.h>
#include <omp.h>

#include "gibbs/error.hpp"

namespace gibbs {

TVEstimate estimate_tv(std::span<const FamilyMember> members, std::size_t k, const Vec& a, TVMethod method,
                       RatioMethod ratio, std::size_t samples, std::uint64_t seed, Exec exec)
{
    switch (method) {
    case TVMethod::ScheffeQuadrature: return tv_scheffe(members, k, a);
    case TVMethod::SumMC: return tv_sum_mc(members, k, a, {samples, seed, exec}, ratio);
    case TVMethod::JointMC: return tv_joint_mc(members, k, a, {samples, seed, exec});
    }
    throw UnsupportedError("unknown TV method");
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& config, const SweepOptions& opts)
{
    config.validate();
    if (opts.threads > 0)
        omp_set_num_threads(opts.threads);

    struct Task {
        std::size_t n;
        Vec a;
    };
    std::vector<Task> tasks;
    for (auto n : config.n_values)
        for (const auto& a : config.a_values)
            tasks.push_back({n, a});

    std::vector<ResultRow> rows(tasks.size());
    const RandomStream root(config.seed);
    const auto count = static_cast<std::ptrdiff_t>(tasks.size());

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < count; ++r) {
        const auto& task = tasks[static_cast<std::size_t>(r)];
        ResultRow& row = rows[static_cast<std::size_t>(r)];
        row.n = task.n;
        row.k = config.k_rule.apply(task.n);
        row.a = task.a;
        row.method = config.method;
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto members = make_members(config.pattern, task.n);
            const auto tilt = solve_tilt(members, task.a);
            row.theta = tilt.theta;
            const auto est = estimate_tv(members, row.k, task.a, config.method, config.ratio, config.samples,
                                         root.split(static_cast<std::uint64_t>(r)).key());
            row.tv = est.value;
            row.std_error = est.std_error;
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
#pragma omp critical(gibbs_log)
            fmt::print(stderr, "sweep: row {} (n={}, k={}) failed: {}\n", r, row.n, row.k, e.what());
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return rows;
}

ScalingFit fit_scaling(std::span<const ScalingPoint> points)
{
    std::vector<ScalingPoint> usable;
    for (const auto& p : points)
        if (p.tv > 0.0 && std::isfinite(p.tv) && p.k > 0 && p.n > 0)
            usable.push_back(p);
    if (usable.size() < 3)
        throw DomainError("fit_scaling: need at least 3 rows with tv > 0, got " + std::to_string(usable.size()));

    const double m = static_cast<double>(usable.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& p : usable) {
        sx += std::log(static_cast<double>(p.k) / static_cast<double>(p.n));
        sy += std::log(p.tv);
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : usable) {
        const double dx = std::log(static_cast<double>(p.k) / static_cast<double>(p.n)) - mx;
        const double dy = std::log(p.tv) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0))
        throw DomainError("fit_scaling: all rows share the same k/n");
    ScalingFit fit;
    fit.exponent = sxy / sxx;
    fit.log_constant = my - fit.exponent * mx;
    const double ss_res = std::max(0.0, syy - fit.exponent * sxy);
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    fit.points = std::move(usable);
    return fit;
}

ScalingFit fit_scaling(std::span<const ResultRow> rows)
{
    std::vector<ScalingPoint> points;
    for (const auto& r : rows)
        if (r.ok)
            points.push_back({r.n, r.k, r.tv});
    return fit_scaling(points);
}

std::string format_results_csv(std::span<const ResultRow> rows, bool with_timings)
{
    std::string out = "n,k,a,theta,method,tv,std_error,seconds\n";
    for (const auto& r : rows) {
        if (!r.ok)
            continue;
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.n, r.k, format_vector(r.a), format_vector(r.theta),
                           to_string(r.method), format_double(r.tv), format_double(r.std_error),
                           with_timings ? format_double(r.seconds) : std::string());
    }
    return out;
}

std::string format_scaling_csv(std::span<const ResultRow> rows, const std::optional<ScalingFit>& fit)
{
    std::string out = "n,k,log_k_over_n,log_tv,fitted_log_tv\n";
    for (const auto& r : rows) {
        if (!r.ok || !(r.tv > 0.0))
            continue;
        const double x = std::log(static_cast<double>(r.k) / static_cast<double>(r.n));
        out += fmt::format("{},{},{},{},{}\n", r.n, r.k, format_double(x), format_double(std::log(r.tv)),
                           fit ? format_double(fit->log_constant + fit->exponent * x) : std::string());
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw std::runtime_error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

void emit_report(std::span<const ResultRow> rows, const std::optional<ScalingFit>& fit,
                 const std::filesystem::path& dir, bool with_timings)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    write_file_atomic(dir / "results.csv", format_results_csv(rows, with_timings));
    write_file_atomic(dir / "scaling.csv", format_scaling_csv(rows, fit));
}

} // namespace gibbs
