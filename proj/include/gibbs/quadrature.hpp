#ifndef GIBBS_QUADRATURE_HPP
#define GIBBS_QUADRATURE_HPP

#include <functional>
#include <span>

namespace gibbs {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
};

/// Adaptive 31-point Gauss-Kronrod on [a, b]; infinite limits allowed.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12,
                     unsigned max_depth = 20);

/// Sum of adaptive integrals over consecutive breakpoints (sorted ascending).
QuadResult integrate_pieces(const std::function<double(double)>& f, std::span<const double> breakpoints,
                            double rel_tol = 1e-12, unsigned max_depth = 20);

/// Fixed composite 20-point Gauss-Legendre with `panels` equal panels.
double integrate_composite(const std::function<double(double)>& f, double a, double b, std::size_t panels);

} // namespace gibbs

#endif
