#pragma once

#include <functional>

namespace tdlab {

// Adaptive Simpson on [a, b] with absolute tolerance. The integrand must be
// finite on the closed interval.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

}  // namespace tdlab
