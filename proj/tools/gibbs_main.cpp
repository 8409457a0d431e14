#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

#include "gibbs/conditional.hpp"
#include "gibbs/config.hpp"
#include "gibbs/edgeworth.hpp"
#include "gibbs/error.hpp"
#include "gibbs/sweep.hpp"
#include "gibbs/tilt.hpp"
#include "gibbs/tv.hpp"
#include "gibbs/validate.hpp"

using namespace gibbs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Globals {
    std::string config_path;
    std::vector<std::string> member_specs;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out;
};

struct Coordinates {
    std::optional<std::size_t> n;
    std::optional<std::size_t> k;
    std::string a;
};

// Config from --config, with --member entries replacing the family pattern.
ExperimentConfig resolve_config(const Globals& g)
{
    ExperimentConfig cfg;
    if (!g.config_path.empty())
        cfg = load_config(g.config_path);
    if (!g.member_specs.empty()) {
        cfg.pattern.clear();
        for (const auto& spec : g.member_specs)
            cfg.pattern.push_back(parse_member(spec));
    }
    if (cfg.pattern.empty())
        throw ConfigError("no family members: pass --config or --member");
    if (g.seed)
        cfg.seed = *g.seed;
    return cfg;
}

std::size_t resolve_n(const ExperimentConfig& cfg, const Coordinates& c)
{
    if (c.n)
        return *c.n;
    if (!cfg.n_values.empty())
        return cfg.n_values.front();
    throw ConfigError("n not given: pass --n or a [sweep] n list");
}

std::size_t resolve_k(const ExperimentConfig& cfg, const Coordinates& c, std::size_t n)
{
    const std::size_t k = c.k ? *c.k : cfg.k_rule.apply(n);
    if (k < 1 || k >= n)
        throw ConfigError(fmt::format("k = {} outside [1, n) for n = {}", k, n));
    return k;
}

Vec resolve_a(const ExperimentConfig& cfg, const Coordinates& c)
{
    Vec a;
    if (!c.a.empty())
        a = parse_vector(c.a);
    else if (!cfg.a_values.empty())
        a = cfg.a_values.front();
    else
        throw ConfigError("a not given: pass --a or a [sweep] a line");
    if (a.size() != static_cast<Eigen::Index>(cfg.pattern.front().dim()))
        throw ConfigError(fmt::format("a has {} components, members have dimension {}", a.size(),
                                      cfg.pattern.front().dim()));
    return a;
}

void emit(const Globals& g, const std::string& text)
{
    if (g.out.empty())
        std::cout << text << std::flush;
    else
        write_file_atomic(g.out, text);
}

int cmd_tilt(const Globals& g, const Coordinates& c)
{
    const auto cfg = resolve_config(g);
    const std::size_t n = resolve_n(cfg, c);
    const Vec a = resolve_a(cfg, c);
    const auto members = make_members(cfg.pattern, n);
    const auto sol = solve_tilt(members, a);
    std::string out = "n,a,theta,residual,iterations,converged\n";
    out += fmt::format("{},{},{},{},{},{}\n", n, format_vector(a), format_vector(sol.theta),
                       format_double(sol.residual_norm), sol.iterations, sol.converged ? "true" : "false");
    emit(g, out);
    return sol.converged ? kExitOk : kExitFailure;
}

int cmd_edgeworth(const Globals& g, const Coordinates& c, const std::string& theta_text, std::size_t points,
                  double half_width)
{
    const auto cfg = resolve_config(g);
    const std::size_t m = resolve_n(cfg, c);
    const auto members = make_members(cfg.pattern, m);
    const std::size_t d = members.front().dim();
    const Vec theta = theta_text.empty() ? Vec::Zero(static_cast<Eigen::Index>(d)) : parse_vector(theta_text);
    const auto law = closed_form_sum(members, theta);
    if (!law)
        throw UnsupportedError("edgeworth: the exact sum law needs a closed form");
    const auto model1 = build_model(members, theta, EdgeworthOrder::One);
    auto model0 = model1;
    model0.order = EdgeworthOrder::Zero;

    std::string out = "x,exact,order0,order1,abs_err0,abs_err1\n";
    double sup0 = 0.0;
    double sup1 = 0.0;
    for (const auto& x : uniform_grid(d, points, half_width)) {
        const double exact = normalized_sum_density(model1, *law, x);
        const double e0 = edgeworth_density(model0, x);
        const double e1 = edgeworth_density(model1, x);
        const double w = 1.0 + std::pow(x.squaredNorm(), 2);
        sup0 = std::max(sup0, w * std::abs(exact - e0));
        sup1 = std::max(sup1, w * std::abs(exact - e1));
        out += fmt::format("{},{},{},{},{},{}\n", format_vector(x), format_double(exact), format_double(e0),
                           format_double(e1), format_double(std::abs(exact - e0)), format_double(std::abs(exact - e1)));
    }
    emit(g, out);
    fmt::print(stderr, "weighted sup error: order0 {:.6g}, order1 {:.6g}\n", sup0, sup1);
    return kExitOk;
}

int cmd_ratio(const Globals& g, const Coordinates& c, std::size_t points, double width)
{
    const auto cfg = resolve_config(g);
    const std::size_t n = resolve_n(cfg, c);
    const std::size_t k = resolve_k(cfg, c, n);
    const Vec a = resolve_a(cfg, c);
    const auto members = make_members(cfg.pattern, n);
    const BlockSplit split(members, k, a);
    if (split.dim() != 1)
        throw UnsupportedError("ratio: the t-grid is one-dimensional");
    if (points < 2)
        throw ConfigError("ratio: need at least 2 grid points");

    const double mu = split.block_mean()(0);
    const double sd = std::sqrt(split.block_cov()(0, 0));
    double lo = mu - width * sd;
    const double hi = mu + width * sd;
    if (members.front().kind() == FamilyKind::Gamma)
        lo = std::max(lo, hi * 1e-6);

    std::string out = "t,t_tilde,t_sharp,exact,edgeworth\n";
    for (std::size_t i = 0; i < points; ++i) {
        const Vec t = scalar_vec(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
        const auto xc = split.coords(t);
        const std::string exact = split.has_closed_form() ? format_double(split.ratio_exact(t)) : std::string();
        out += fmt::format("{},{},{},{},{}\n", format_vector(t), format_vector(xc.t_tilde), format_vector(xc.t_sharp),
                           exact, format_double(split.ratio_edgeworth(t)));
    }
    emit(g, out);
    return kExitOk;
}

int cmd_tv(const Globals& g, const Coordinates& c, const std::string& method_text, const std::string& ratio_text,
           std::optional<std::size_t> samples)
{
    auto cfg = resolve_config(g);
    if (!method_text.empty())
        cfg.method = parse_tv_method(method_text);
    if (!ratio_text.empty()) {
        if (ratio_text == "exact")
            cfg.ratio = RatioMethod::Exact;
        else if (ratio_text == "edgeworth")
            cfg.ratio = RatioMethod::Edgeworth;
        else
            throw ConfigError("unknown ratio method '" + ratio_text + "'");
    }
    if (samples)
        cfg.samples = *samples;
    const std::size_t n = resolve_n(cfg, c);
    const std::size_t k = resolve_k(cfg, c, n);
    const Vec a = resolve_a(cfg, c);
    const auto members = make_members(cfg.pattern, n);

    const auto start = std::chrono::steady_clock::now();
    const auto est = estimate_tv(members, k, a, cfg.method, cfg.ratio, cfg.samples, cfg.seed);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::string out = "n,k,a,method,value,std_error,seconds\n";
    out += fmt::format("{},{},{},{},{},{},{}\n", n, k, format_vector(a), to_string(est.method),
                       format_double(est.value), format_double(est.std_error), format_double(seconds));
    emit(g, out);
    return kExitOk;
}

int cmd_check(const Globals& g, const Coordinates& c, CheckOptions opts)
{
    const auto cfg = resolve_config(g);
    std::vector<std::size_t> ns = cfg.n_values;
    if (c.n)
        ns = {*c.n};
    if (ns.empty())
        throw ConfigError("check: pass --n or a [sweep] n list");
    std::vector<Vec> as = cfg.a_values;
    if (!c.a.empty())
        as = {resolve_a(cfg, c)};
    if (as.empty())
        throw ConfigError("check: pass --a or a [sweep] a line");

    std::vector<Vec> thetas;
    std::size_t n_max = 0;
    for (std::size_t n : ns) {
        const auto members = make_members(cfg.pattern, n);
        for (const auto& a : as) {
            const auto sol = solve_tilt(members, a);
            if (!sol.converged)
                throw NumericalError(fmt::format("check: tilt did not converge at n = {}", n));
            thetas.push_back(sol.theta);
        }
        n_max = std::max(n_max, n);
    }
    const auto members = make_members(cfg.pattern, n_max);
    const auto box = make_theta_box(members, thetas);
    const auto report = check_all(members, box, opts);

    std::size_t width = 10;
    for (const auto& e : report.entries)
        width = std::max(width, e.name.size());
    std::string text = fmt::format("theta box: [{}] .. [{}]\n", format_vector(box.lower), format_vector(box.upper));
    text += fmt::format("{:<{}}  {:<6}  {:>14}  {:>14}  {}\n", "assumption", width, "result", "witness1", "witness2",
                        "note");
    for (const auto& e : report.entries)
        text += fmt::format("{:<{}}  {:<6}  {:>14.6g}  {:>14.6g}  {}\n", e.name, width, e.passed ? "pass" : "FAIL",
                            e.witness1, e.witness2, e.note);

    std::string csv = "assumption,passed,witness1,witness2\n";
    for (const auto& e : report.entries)
        csv += fmt::format("{},{},{},{}\n", e.name, e.passed ? "true" : "false", format_double(e.witness1),
                           format_double(e.witness2));

    if (g.out.empty()) {
        std::cout << text << '\n' << csv << std::flush;
    } else {
        std::cout << text << std::flush;
        write_file_atomic(g.out, csv);
    }
    return report.all_passed() ? kExitOk : kExitFailure;
}

int cmd_sweep(const Globals& g, bool timings)
{
    if (g.config_path.empty())
        throw ConfigError("sweep: --config is required");
    auto cfg = resolve_config(g);
    if (!g.out.empty())
        cfg.output = g.out;
    cfg.validate();

    const auto rows = run_sweep(cfg, SweepOptions{g.threads});
    std::optional<ScalingFit> fit;
    try {
        fit = fit_scaling(std::span<const ResultRow>(rows));
    } catch (const DomainError& e) {
        fmt::print(stderr, "scaling fit skipped: {}\n", e.what());
    }
    emit_report(rows, fit, cfg.output, timings);

    std::size_t failed = 0;
    for (const auto& r : rows)
        failed += r.ok ? 0 : 1;
    fmt::print("rows: {} ({} failed)\n", rows.size(), failed);
    if (fit)
        fmt::print("fit: log tv = {:.6f} * log(k/n) + {:.6f}, r^2 = {:.6f}\n", fit->exponent, fit->log_constant,
                   fit->r_squared);
    fmt::print("wrote {}/results.csv and {}/scaling.csv\n", cfg.output, cfg.output);
    return failed == 0 ? kExitOk : kExitFailure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gibbs conditioning experiments: tilts, Edgeworth expansions, density ratios and TV distances"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "Experiment config file");
    app.add_option("--member", g.member_specs, "Family member, e.g. \"{gamma, shape=3, scale=1}\" (repeatable)");
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--threads", g.threads, "Worker threads (overrides OMP_NUM_THREADS)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", g.out, "Output file (sweep: output directory)");

    Coordinates c;
    auto add_coords = [&c](CLI::App* sub, bool with_k) {
        sub->add_option("--n", c.n, "Sequence length");
        if (with_k)
            sub->add_option("--k", c.k, "Block size (default: config k-rule)");
        sub->add_option("--a", c.a, "Conditioning mean, space-separated components");
    };

    auto* tilt = app.add_subcommand("tilt", "Solve for the tilt theta_n^a");
    add_coords(tilt, false);

    std::string theta_text;
    std::size_t points = 241;
    double half_width = 6.0;
    auto* edge = app.add_subcommand("edgeworth", "Exact vs order-0/order-1 Edgeworth density of the normalized sum");
    edge->add_option("--n", c.n, "Number of summands m");
    edge->add_option("--theta", theta_text, "Tilt applied to every member (default 0)");
    edge->add_option("--points", points, "Grid points per axis")->capture_default_str();
    edge->add_option("--half-width", half_width, "Grid half-width")->capture_default_str();

    std::size_t ratio_points = 201;
    double ratio_width = 6.0;
    auto* ratio = app.add_subcommand("ratio", "Exact vs Edgeworth density ratio over a t-grid");
    add_coords(ratio, true);
    ratio->add_option("--points", ratio_points, "Grid points")->capture_default_str();
    ratio->add_option("--width", ratio_width, "Grid half-width in block standard deviations")->capture_default_str();

    std::string method_text;
    std::string ratio_text;
    std::optional<std::size_t> samples;
    auto* tv = app.add_subcommand("tv", "Estimate the TV distance for one (n, k, a)");
    add_coords(tv, true);
    tv->add_option("--method", method_text, "scheffe | sum_mc | joint_mc");
    tv->add_option("--ratio", ratio_text, "exact | edgeworth (sum_mc only)");
    tv->add_option("--samples", samples, "Monte Carlo sample count");

    CheckOptions check_opts;
    auto* check = app.add_subcommand("check", "Run the assumption checks over the sweep's tilt box");
    add_coords(check, false);
    check->add_option("--theta-points", check_opts.theta_points, "Theta grid points per axis")->capture_default_str();
    check->add_option("--t-points", check_opts.t_points, "Frequency grid points")->capture_default_str();

    bool timings = false;
    auto* sweep = app.add_subcommand("sweep", "Run the configured sweep and write results.csv and scaling.csv");
    sweep->add_flag("--timings", timings, "Fill the seconds column of results.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (g.threads > 0)
        omp_set_num_threads(g.threads);

    try {
        if (*tilt)
            return cmd_tilt(g, c);
        if (*edge)
            return cmd_edgeworth(g, c, theta_text, points, half_width);
        if (*ratio)
            return cmd_ratio(g, c, ratio_points, ratio_width);
        if (*tv)
            return cmd_tv(g, c, method_text, ratio_text, samples);
        if (*check)
            return cmd_check(g, c, check_opts);
        if (*sweep)
            return cmd_sweep(g, timings);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitFailure;
    }
    return kExitFailure;
}
