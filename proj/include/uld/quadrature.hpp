#pragma once

#include <functional>

namespace uld {

// Adaptive Simpson on [a, b]; recursion depth capped at 60. Throws
// NumericalError when the requested tolerance cannot be met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol = 1e-13);

// Composite Gauss-Legendre (fixed 32-node panels). Deterministic cost; used
// where the integrand is smooth and a hard relative target is wanted.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels = 8);

}  // namespace uld
