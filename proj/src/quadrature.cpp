#include "fxtriplet/quadrature.hpp"

namespace fxtriplet {

std::vector<double> uniform_simpson_weights(std::size_t n, double h)
{
    std::vector<double> w(n + 1, 0.0);
    if (n == 0) return w;
    if (n == 1) {
        w[0] = w[1] = 0.5 * h;
        return w;
    }
    const std::size_t simpson_n = (n % 2 == 0) ? n : n - 3;
    for (std::size_t i = 0; i + 2 <= simpson_n; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if (n % 2 == 1) {
        const std::size_t s = simpson_n;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    return w;
}

}  // namespace fxtriplet
