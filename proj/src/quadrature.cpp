#include "gibbs/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gibbs/error.hpp"

namespace gibbs {

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, unsigned max_depth)
{
    if (a == b)
        return {};
    QuadResult r;
    r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &r.error);
    return r;
}

QuadResult integrate_pieces(const std::function<double(double)>& f, std::span<const double> breakpoints,
                            double rel_tol, unsigned max_depth)
{
    QuadResult total;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] >= breakpoints[i]))
            throw NumericalError("integrate_pieces: breakpoints are not sorted");
        const auto piece = integrate(f, breakpoints[i], breakpoints[i + 1], rel_tol, max_depth);
        total.value += piece.value;
        total.error += piece.error;
    }
    return total;
}

double integrate_composite(const std::function<double(double)>& f, double a, double b, std::size_t panels)
{
    if (panels == 0)
        throw NumericalError("integrate_composite: need at least one panel");
    const double h = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t i = 0; i < panels; ++i) {
        const double lo = a + h * static_cast<double>(i);
        sum += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, lo + h);
    }
    return sum;
}

} // namespace gibbs
