// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. argv[1] is the path of the gibbs
// command-line binary (used by the determinism criterion).
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "gibbs/conditional.hpp"
#include "gibbs/config.hpp"
#include "gibbs/edgeworth.hpp"
#include "gibbs/rng.hpp"
#include "gibbs/sweep.hpp"
#include "gibbs/tilt.hpp"
#include "gibbs/tv.hpp"
#include "gibbs/validate.hpp"
#include "oracles.hpp"

using namespace gibbs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

Members gamma_iid(double shape, std::size_t n) { return make_members(Members{FamilyMember::gamma(shape, 1.0)}, n); }

std::size_t ceil_sqrt(std::size_t n) { return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))); }

Outcome tilt_correctness()
{
    RandomStream rng(20240601);
    double worst = 0.0;
    std::size_t max_iter = 0;
    bool all_converged = true;
    auto record = [&](const Members& ms, const Vec& a) {
        const auto sol = solve_tilt(ms, a);
        const Vec th = tilt_oracle(ms, a);
        worst = std::max(worst, (sol.theta - th).norm() / (1.0 + th.norm()));
        max_iter = std::max(max_iter, sol.iterations);
        all_converged = all_converged && sol.converged;
    };
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = static_cast<Eigen::Index>(1 + trial % 3);
        const std::size_t count = 1 + static_cast<std::size_t>(rng.uniform() * 40);
        Members ms;
        for (std::size_t j = 0; j < count; ++j) {
            Mat f(d, d);
            Vec mu(d);
            for (Eigen::Index r = 0; r < d; ++r) {
                mu(r) = 3.0 * rng.normal();
                for (Eigen::Index c = 0; c < d; ++c)
                    f(r, c) = rng.normal();
            }
            ms.push_back(FamilyMember::normal(mu, f * f.transpose() + 0.2 * Mat::Identity(d, d), j + 1));
        }
        Vec a(d);
        for (Eigen::Index r = 0; r < d; ++r)
            a(r) = 4.0 * rng.normal();
        record(ms, a);
    }
    for (int trial = 0; trial < 100; ++trial) {
        const double scale = 0.1 + 3.0 * rng.uniform();
        const std::size_t count = 2 + static_cast<std::size_t>(rng.uniform() * 60);
        Members ms;
        for (std::size_t j = 0; j < count; ++j)
            ms.push_back(FamilyMember::gamma(2.05 + 8.0 * rng.uniform(), scale, j + 1));
        record(ms, scalar_vec(scale * (0.2 + 25.0 * rng.uniform())));
    }
    return {all_converged && worst <= 1e-10 && max_iter <= 30,
            fmt::format("max relative deviation {:.2e}, max iterations {}", worst, max_iter)};
}

Outcome edgeworth_decay()
{
    std::vector<double> errors;
    for (std::size_t m : {64, 128, 256, 512}) {
        const auto model = build_model(gamma_iid(3.0, m), scalar_vec(0), EdgeworthOrder::One);
        const double K = 3.0 * static_cast<double>(m);
        const double sd = std::sqrt(K);
        const auto exact = [&](const Vec& x) { return sd * oracle::gamma_pdf(K + sd * x(0), K, 1.0); };
        errors.push_back(weighted_sup_error(model, exact, uniform_grid(1)));
    }
    bool ok = true;
    std::string ratios;
    for (std::size_t i = 1; i < errors.size(); ++i) {
        const double r = errors[i - 1] / errors[i];
        ok = ok && r >= 1.6 && r <= 2.4;
        ratios += fmt::format("{}{:.3f}", i > 1 ? ", " : "", r);
    }
    return {ok, fmt::format("errors {:.3e} .. {:.3e}, halving ratios {}", errors.front(), errors.back(), ratios)};
}

Outcome gaussian_exactness()
{
    RandomStream rng(5);
    double worst = 0.0;
    const auto grid = uniform_grid(1);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::pair<double, double>> params;
        Members pattern;
        for (int j = 0; j < 3; ++j) {
            params.emplace_back(2.0 * rng.normal(), 0.2 + 3.0 * rng.uniform());
            pattern.push_back(FamilyMember::normal(params.back().first, params.back().second));
        }
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 300);
        const double theta = 0.5 * rng.normal();
        // Tilted N(mu, v) is N(mu + v theta, v); the sum law follows by adding.
        double mean = 0.0;
        double var = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto [mu, v] = params[j % params.size()];
            mean += mu + v * theta;
            var += v;
        }
        const auto model = build_model(make_members(pattern, m), scalar_vec(theta), EdgeworthOrder::One);
        const double sd = std::sqrt(var);
        for (const auto& x : grid) {
            const double s = mean + sd * x(0);
            const double exact = oracle::normal_pdf(s, mean, var);
            worst = std::max(worst, std::abs(edgeworth_sum_density(model, scalar_vec(s)) - exact) * sd);
            worst = std::max(worst, std::abs(edgeworth_density(model, x) - oracle::std_normal_pdf(x(0))));
        }
    }
    return {worst <= 1e-12, fmt::format("max |approx - exact| {:.2e} over 25 models x 241 points", worst)};
}

Outcome sufficiency()
{
    const auto normal = make_members(Members{FamilyMember::normal(0, 1)}, 100);
    const auto gamma = gamma_iid(3.0, 100);
    const auto qn = tv_scheffe(normal, 2, scalar_vec(0.5)).value;
    const auto jn = tv_joint_mc(normal, 2, scalar_vec(0.5), MCOptions{100'000, 101, Exec::Parallel});
    const auto qg = tv_scheffe(gamma, 2, scalar_vec(6)).value;
    const auto jg = tv_joint_mc(gamma, 2, scalar_vec(6), MCOptions{100'000, 202, Exec::Parallel});
    const double zn = std::abs(jn.value - qn) / jn.std_error;
    const double zg = std::abs(jg.value - qg) / jg.std_error;
    return {zn <= 3.0 && zg <= 3.0,
            fmt::format("normal {:.6f} vs {:.6f} ({:.2f} se), gamma {:.6f} vs {:.6f} ({:.2f} se)", jn.value, qn, zn,
                        jg.value, qg, zg)};
}

Outcome scaling()
{
    bool ok = true;
    std::string detail;
    const std::vector<std::pair<std::string, Members>> cases{
        {"iid", Members{FamilyMember::gamma(3.0, 1.0)}},
        {"alternating", Members{FamilyMember::gamma(2.5, 1.0), FamilyMember::gamma(4.0, 1.0)}}};
    for (const auto& [name, pattern] : cases) {
        std::vector<ScalingPoint> pts;
        for (std::size_t n : {200, 400, 800, 1600}) {
            const std::size_t k = ceil_sqrt(n);
            pts.push_back({n, k, tv_scheffe(make_members(pattern, n), k, scalar_vec(6)).value});
        }
        const auto fit = fit_scaling(std::span<const ScalingPoint>(pts));
        ok = ok && fit.exponent >= 0.9 && fit.exponent <= 1.1 && fit.r_squared >= 0.98;
        detail += fmt::format("{}{}: slope {:.4f}, r^2 {:.5f}", detail.empty() ? "" : "; ", name, fit.exponent,
                              fit.r_squared);
    }
    return {ok, detail};
}

Outcome diaconis_freedman()
{
    const double gamma = df_gamma_constant();
    const bool constant_ok = std::abs(gamma - oracle::df_gamma()) <= 1e-10;
    std::vector<double> dev;
    std::string detail = fmt::format("gamma {:.12f};", gamma);
    for (std::size_t n : {500, 1000, 2000}) {
        const double tvn =
            tv_scheffe(make_members(Members{FamilyMember::normal(0, 1)}, n), 1, scalar_vec(0.5)).value * static_cast<double>(n);
        dev.push_back(std::abs(tvn / gamma - 1.0));
        detail += fmt::format(" n={} TV*n={:.6f}", n, tvn);
    }
    const bool monotone = dev[1] < dev[0] && dev[2] < dev[1];
    return {constant_ok && monotone && dev.back() <= 0.05,
            detail + fmt::format(", deviation at n=2000 {:.3f}%", 100.0 * dev.back())};
}

Outcome tilting_invariance()
{
    RandomStream rng(77);
    double worst = 0.0;
    std::size_t checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 199);
        const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1));
        const double frac = static_cast<double>(k) / static_cast<double>(n);
        Members pattern;
        Vec a;
        Vec t;
        if (i % 2 == 0) {
            const double scale = 0.3 + 2.0 * rng.uniform();
            pattern = {FamilyMember::gamma(2.1 + 4.0 * rng.uniform(), scale),
                       FamilyMember::gamma(2.1 + 4.0 * rng.uniform(), scale)};
            a = scalar_vec(scale * (0.5 + 10.0 * rng.uniform()));
            // t spread over the bulk of the conditional law of S_{1,k} on (0, na).
            const double beta_mean = frac * static_cast<double>(n) * a(0);
            t = scalar_vec(beta_mean * (0.5 + rng.uniform()));
            if (t(0) >= static_cast<double>(n) * a(0))
                t(0) = 0.5 * static_cast<double>(n) * a(0);
        } else {
            pattern = {FamilyMember::normal(rng.normal(), 0.3 + 2.0 * rng.uniform()),
                       FamilyMember::normal(rng.normal(), 0.3 + 2.0 * rng.uniform())};
            a = scalar_vec(2.0 * rng.normal());
            t = scalar_vec(static_cast<double>(k) * a(0) + std::sqrt(static_cast<double>(k)) * 2.0 * rng.normal());
        }
        const auto [untilted, tilted] = tilting_invariance_check(make_members(pattern, n), k, a, t);
        if (!(std::isfinite(untilted) && std::isfinite(tilted) && untilted > 0.0))
            return {false, fmt::format("non-finite or zero density at point {}", i)};
        worst = std::max(worst, std::abs(untilted - tilted) / std::abs(untilted));
        ++checked;
    }
    return {worst <= 1e-10, fmt::format("{} points, max relative difference {:.2e}", checked, worst)};
}

AssumptionReport report_for_config(const fs::path& path)
{
    const auto cfg = load_config(path);
    std::vector<Vec> thetas;
    std::size_t n_max = 0;
    for (std::size_t n : cfg.n_values) {
        for (const auto& a : cfg.a_values)
            thetas.push_back(solve_tilt(make_members(cfg.pattern, n), a).theta);
        n_max = std::max(n_max, n);
    }
    const auto members = make_members(cfg.pattern, n_max);
    return check_all(members, make_theta_box(members, thetas));
}

Outcome assumption_suite()
{
    std::string detail;
    bool ok = true;
    for (const char* name : {"gamma_iid.cfg", "gamma_alternating.cfg", "normal_iid.cfg", "normal_2d.cfg"}) {
        const auto report = report_for_config(fs::path(GIBBS_CONFIG_DIR) / name);
        if (!report.all_passed()) {
            ok = false;
            for (const auto& e : report.entries)
                if (!e.passed)
                    detail += fmt::format(" {} fails {};", name, e.name);
        }
    }

    Mat near_singular = Mat::Zero(2, 2);
    near_singular.diagonal() << 1.0, 1e-15;
    const Members singular{FamilyMember::normal(Vec::Zero(2), near_singular)};
    const ThetaBox origin2{Vec::Zero(2), Vec::Zero(2)};
    const Members gamma{FamilyMember::gamma(3.0, 1.0)};
    const Members point_mass{FamilyMember::normal(0.0, 1e-20)};
    const ThetaBox origin1{scalar_vec(0), scalar_vec(0)};
    const Members injected{FamilyMember::gamma(2.5, 1.0), FamilyMember::gamma(4.0, 1.0), FamilyMember::gamma(2.2, 1.0)};
    const GammaEnvelope env{2.5, 4.0, 1.0};

    const std::vector<std::pair<std::string, AssumptionEntry>> controls{
        {"Cv on a near-singular covariance", check_cv(singular, origin2)},
        {"AM4 on a box touching the edge of Theta", check_am4(gamma, ThetaBox{scalar_vec(0.9), scalar_vec(0.999)})},
        {"Cf1 on a near-singular covariance", check_cf_decay(singular, origin2)},
        {"Cf3 on a near point mass", check_cf3(point_mass, origin1)},
        {"Uf with a shape below the envelope", check_uf(injected, ThetaBox{scalar_vec(-1), scalar_vec(0.5)}, env)},
    };
    std::size_t caught = 0;
    for (const auto& [label, entry] : controls) {
        if (entry.passed) {
            ok = false;
            detail += fmt::format(" control '{}' passed;", label);
        } else {
            ++caught;
        }
    }
    return {ok, fmt::format("4 fixtures checked, {}/{} negative controls rejected{}", caught, controls.size(), detail)};
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism(const std::string& cli)
{
    if (cli.empty())
        return {false, "no CLI path given"};
    const auto base = fs::temp_directory_path() / "gibbs_acceptance_determinism";
    fs::remove_all(base);
    const auto cfg = fs::path(GIBBS_CONFIG_DIR) / "gamma_mc.cfg";
    std::vector<std::string> contents;
    for (int threads : {1, 4, 3}) {
        const auto out = base / fmt::format("threads{}", threads);
        const auto cmd = fmt::format("\"{}\" sweep --config \"{}\" --threads {} --out \"{}\" > /dev/null", cli,
                                     cfg.string(), threads, out.string());
        if (std::system(cmd.c_str()) != 0)
            return {false, "sweep command failed: " + cmd};
        contents.push_back(read_file(out / "results.csv"));
    }
    const bool same = contents[0] == contents[1] && contents[0] == contents[2];
    const auto rows = std::count(contents[0].begin(), contents[0].end(), '\n') - 1;
    return {same && rows == 6, fmt::format("results.csv for --threads 1, 4, 3: {} ({} rows)",
                                           same ? "byte-identical" : "DIFFERENT", rows)};
}

} // namespace

int main(int argc, char** argv)
{
    const std::string cli = argc > 1 ? argv[1] : "";
    struct Criterion {
        const char* name;
        double budget_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"tilt correctness", 5.0, tilt_correctness},
        {"Edgeworth decay", 30.0, edgeworth_decay},
        {"Gaussian exactness", 60.0, gaussian_exactness},
        {"sufficiency identity", 60.0, sufficiency},
        {"main theorem scaling", 300.0, scaling},
        {"Diaconis-Freedman constant", 60.0, diaconis_freedman},
        {"tilting invariance", 60.0, tilting_invariance},
        {"assumption suite", 120.0, assumption_suite},
        {"sweep determinism", 120.0, [&] { return determinism(cli); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto start = Clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        const bool in_budget = secs <= c.budget_seconds;
        const bool passed = out.passed && in_budget;
        failures += passed ? 0 : 1;
        fmt::print("[{}] {}. {} ({:.2f} s, budget {:.0f} s): {}{}\n", passed ? "PASS" : "FAIL", i + 1, c.name, secs,
                   c.budget_seconds, out.detail, in_budget ? "" : " [over time budget]");
        std::fflush(stdout);
    }
    fmt::print("{} of {} acceptance criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
               criteria.size());
    return failures == 0 ? 0 : 1;
}
