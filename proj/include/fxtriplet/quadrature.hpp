#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fxtriplet {

class QuadratureError : public std::runtime_error {
public:
    explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

struct SimpsonOptions {
    std::size_t initial_panels = 2048;
    double rel_tol = 1e-10;
    double abs_tol = 1e-300;
    int max_doublings = 24;
};

/// Composite Simpson on [a, b], doubling the panel count until two successive
/// estimates agree to rel_tol. `label` names the integral in the error message.
template <class F>
double integrate_simpson(F&& f, double a, double b, const SimpsonOptions& opt = {},
                         const char* label = "integral")
{
    if (b == a) return 0.0;
    std::size_t n = opt.initial_panels + (opt.initial_panels % 2);
    if (n < 2) n = 2;

    // Keep the running sums of endpoint, odd and even nodes so each doubling
    // only evaluates the new midpoints.
    const double ends = f(a) + f(b);
    double h = (b - a) / static_cast<double>(n);
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double v = f(a + h * static_cast<double>(i));
        (i % 2 ? odd : even) += v;
    }
    double prev = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);

    for (int d = 0; d < opt.max_doublings; ++d) {
        even += odd;
        n *= 2;
        h *= 0.5;
        odd = 0.0;
        for (std::size_t i = 1; i < n; i += 2) odd += f(a + h * static_cast<double>(i));
        const double cur = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        if (!std::isfinite(cur))
            throw QuadratureError(std::string(label) + ": non-finite quadrature value");
        if (std::abs(cur - prev) <= opt.rel_tol * std::abs(cur) + opt.abs_tol) return cur;
        prev = cur;
    }
    throw QuadratureError(std::string(label) + ": Simpson refinement did not converge");
}

/// Weights of a composite rule on n equal intervals of width h: Simpson when n
/// is even, Simpson plus a closing 3/8 panel when n is odd, trapezoid for n = 1.
std::vector<double> uniform_simpson_weights(std::size_t n_intervals, double h);

}  // namespace fxtriplet
