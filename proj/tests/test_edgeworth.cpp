#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gibbs/conditional.hpp"
#include "gibbs/config.hpp"
#include "gibbs/edgeworth.hpp"
#include "gibbs/error.hpp"
#include "oracles.hpp"

using namespace gibbs;

namespace {

Vec v2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

Members gamma_iid(double shape, std::size_t m)
{
    return make_members(Members{FamilyMember::gamma(shape, 1.0)}, m);
}

// Exact normalized density of a Gamma(K, s) sum, written out independently.
double gamma_sum_normalized(double x, double K, double s)
{
    const double mean = K * s;
    const double sd = std::sqrt(K) * s;
    return sd * oracle::gamma_pdf(mean + sd * x, K, s);
}

} // namespace

TEST_CASE("weight-3 multi-indices")
{
    CHECK(weight3_indices(1).size() == 1);
    CHECK(weight3_indices(2).size() == 4);
    CHECK(weight3_indices(3).size() == 10);
    const auto idx = weight3_indices(2);
    CHECK(idx.front() == MultiIndex{0, 3});
    CHECK(idx.back() == MultiIndex{3, 0});
    CHECK(multi_factorial(MultiIndex{2, 1}) == 2.0);
    CHECK(multi_factorial(MultiIndex{3}) == 6.0);
}

TEST_CASE("hermite3 examples")
{
    CHECK(hermite3(MultiIndex{3}, scalar_vec(0)) == 0.0);
    CHECK(hermite3(MultiIndex{3}, scalar_vec(2)) == doctest::Approx(2.0));
    CHECK(hermite3(MultiIndex{1, 2}, v2(1, 1)) == doctest::Approx(0.0));
    CHECK(hermite3(MultiIndex{1, 2}, v2(2, 3)) == doctest::Approx(16.0));
    CHECK_THROWS(hermite3(MultiIndex{2}, scalar_vec(1)));
    CHECK_THROWS(hermite3(MultiIndex{1, 1, 2}, Vec::Zero(3)));
}

TEST_CASE("build_model examples")
{
    const auto n = make_members(Members{FamilyMember::normal(0.3, 2.0)}, 12);
    const auto mn = build_model(n, scalar_vec(0.4), EdgeworthOrder::One);
    for (const auto& [nu, chi] : mn.avg_third_cumulants)
        CHECK(chi == 0.0);

    const auto g = gamma_iid(3, 10);
    const auto mg = build_model(g, scalar_vec(0), EdgeworthOrder::One);
    CHECK(mg.avg_third_cumulants.at(MultiIndex{3}) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(mg.mean_sum(0) == doctest::Approx(30.0));

    const auto one = build_model(Members{FamilyMember::normal(0, 1)}, scalar_vec(0), EdgeworthOrder::One);
    CHECK(one.B(0, 0) == doctest::Approx(1.0));
    CHECK(one.mean_sum(0) == 0.0);

    Mat cov(2, 2);
    cov << 2.0, 0.7, 0.7, 1.0;
    const auto n2 = make_members(Members{FamilyMember::normal(v2(0, 0), cov)}, 5);
    const auto m2 = build_model(n2, v2(0.1, 0.2), EdgeworthOrder::One);
    CHECK((m2.B - m2.B.transpose()).norm() < 1e-14);
    CHECK((m2.B * m2.V * m2.B - Mat::Identity(2, 2)).norm() < 1e-10);
    CHECK(m2.avg_third_cumulants.size() == 4);

    Mat bad(2, 2);
    bad << 1.0, 0.0, 0.0, 1e-15;
    const Members degenerate{FamilyMember::normal(v2(0, 0), bad)};
    CHECK_THROWS_AS(build_model(degenerate, v2(0, 0), EdgeworthOrder::One), ConditioningError);
}

TEST_CASE("third cumulant examples and quadrature cross-check")
{
    const auto g = FamilyMember::gamma(3, 1);
    const auto c = third_cumulant(g, scalar_vec(0), scalar_mat(1.0 / std::sqrt(3.0)));
    CHECK(c.at(MultiIndex{3}) == doctest::Approx(6.0 * std::pow(3.0, -1.5)));
    CHECK(c.at(MultiIndex{3}) == doctest::Approx(1.1547).epsilon(1e-4));

    for (double th : {0.0, 0.3, -1.0}) {
        const double s = 1.0 / (1.0 - th);
        const double mean = 3.0 * s;
        const double m3 = oracle::simpson([&](double x) { return std::pow(x - mean, 3) * oracle::gamma_pdf(x, 3, s); },
                                          0.0, 80.0 * s, 400000);
        const auto cc = third_cumulant(g, scalar_vec(th), scalar_mat(1.0));
        CHECK(cc.at(MultiIndex{3}) == doctest::Approx(m3).epsilon(1e-8));
    }

    CHECK(third_cumulant(FamilyMember::normal(0, 4), scalar_vec(1), scalar_mat(0.5)).at(MultiIndex{3}) == 0.0);

    // Independent coordinates: mixed third moments vanish.
    Mat cov = Mat::Zero(2, 2);
    cov.diagonal() << 1.0, 3.0;
    const auto cn = third_cumulant(FamilyMember::normal(v2(0, 0), cov), v2(0, 0), Mat::Identity(2, 2));
    CHECK(cn.at(MultiIndex{2, 1}) == 0.0);
    CHECK(cn.at(MultiIndex{1, 2}) == 0.0);
}

TEST_CASE("edgeworth density examples")
{
    const auto g = gamma_iid(3, 20);
    const auto model = build_model(g, scalar_vec(0.2), EdgeworthOrder::One);
    CHECK(correction_polynomial(model, scalar_vec(0)) == 0.0);
    CHECK(edgeworth_density(model, scalar_vec(0)) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));

    auto zero = model;
    zero.order = EdgeworthOrder::Zero;
    for (double x : {-2.0, 0.5, 3.0})
        CHECK(edgeworth_density(zero, scalar_vec(x)) == doctest::Approx(oracle::std_normal_pdf(x)));

    const auto n = make_members(Members{FamilyMember::normal(v2(1, 0), Mat::Identity(2, 2))}, 4);
    const auto mn = build_model(n, v2(0, 0), EdgeworthOrder::One);
    CHECK(edgeworth_density(mn, v2(0, 0)) == doctest::Approx(1.0 / (2 * std::numbers::pi)));
    CHECK(edgeworth_density(mn, v2(1.0, -0.5)) ==
          doctest::Approx(oracle::std_normal_pdf(1.0) * oracle::std_normal_pdf(-0.5)));
}

TEST_CASE("order-1 density integrates to one")
{
    for (std::size_t m : {8, 64}) {
        const auto model = build_model(gamma_iid(3, m), scalar_vec(0), EdgeworthOrder::One);
        const double total =
            oracle::simpson([&](double x) { return edgeworth_density(model, scalar_vec(x)); }, -14.0, 14.0, 20000);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("order 1 matches the exact Gamma sum at m = 64")
{
    const auto g = gamma_iid(3, 64);
    const auto model = build_model(g, scalar_vec(0), EdgeworthOrder::One);
    std::vector<Vec> grid;
    for (int i = 0; i <= 160; ++i)
        grid.push_back(scalar_vec(-4.0 + 0.05 * i));
    const double err = weighted_sup_error(
        model, [](const Vec& x) { return gamma_sum_normalized(x(0), 192.0, 1.0); }, grid, Exec::Serial);
    CHECK(err * 64.0 < 2.0);

    // The exact law re-expressed by the library matches the independent formula.
    const auto law = *closed_form_sum(g, scalar_vec(0));
    for (const auto& x : grid)
        CHECK(normalized_sum_density(model, law, x) == doctest::Approx(gamma_sum_normalized(x(0), 192.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("weighted sup error examples")
{
    const auto model = build_model(gamma_iid(3, 30), scalar_vec(0), EdgeworthOrder::One);
    const auto grid = uniform_grid(1);
    CHECK(grid.size() == 241);
    CHECK(weighted_sup_error(model, [&](const Vec& x) { return edgeworth_density(model, x); }, grid) == 0.0);

    const auto n = make_members(Members{FamilyMember::normal(0, 1)}, 50);
    const auto mn = build_model(n, scalar_vec(0.3), EdgeworthOrder::One);
    CHECK(weighted_sup_error(mn, [](const Vec& x) { return oracle::std_normal_pdf(x(0)); }, grid) <= 1e-12);
}

TEST_CASE("error halves per doubling for heterogeneous Gamma sums")
{
    Members pattern{FamilyMember::gamma(2.5, 1.0), FamilyMember::gamma(4.0, 1.0), FamilyMember::gamma(3.2, 1.0)};
    double prev = 0.0;
    for (std::size_t m : {48, 96, 192, 384}) {
        const auto ms = make_members(pattern, m);
        const auto model = build_model(ms, scalar_vec(0.1), EdgeworthOrder::One);
        const auto law = *closed_form_sum(ms, scalar_vec(0.1));
        const double err = weighted_sup_error(
            model, [&](const Vec& x) { return normalized_sum_density(model, law, x); }, uniform_grid(1));
        if (prev > 0.0) {
            CHECK(prev / err >= 1.6);
            CHECK(prev / err <= 2.4);
        }
        prev = err;
    }
}

TEST_CASE("grids")
{
    CHECK(uniform_grid(2).size() == 241u * 241u);
    CHECK(uniform_grid(1, 5, 2.0)[1](0) == doctest::Approx(-1.0));
    CHECK(default_error_grid(3).size() == 100000);
    const auto a = gaussian_grid(3, 10, 4);
    const auto b = gaussian_grid(3, 10, 4);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] == b[i]);
}

TEST_CASE("serial and parallel sup errors are identical")
{
    const auto model = build_model(gamma_iid(3, 40), scalar_vec(0), EdgeworthOrder::One);
    const auto law = *closed_form_sum(gamma_iid(3, 40), scalar_vec(0));
    const auto exact = [&](const Vec& x) { return normalized_sum_density(model, law, x); };
    const auto grid = uniform_grid(1, 2001, 6.0);
    CHECK(weighted_sup_error(model, exact, grid, Exec::Serial) == weighted_sup_error(model, exact, grid, Exec::Parallel));
}
