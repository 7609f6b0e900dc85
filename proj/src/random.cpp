#include "abp/random.hpp"

#include <cmath>
#include <numbers>

namespace abp {

std::uint64_t CounterRng::index(std::uint64_t n) {
    if (n <= 1)
        return 0;
    // Rejection sampling on the top of the range keeps the draw unbiased
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = (*this)();
    } while (x >= limit);
    return x % n;
}

std::complex<double> CounterRng::complex_normal(double variance) {
    // Box-Muller; u1 in (0, 1] so the log is finite
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-variance * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

std::complex<double> CounterRng::unit_phase() {
    const double phi = 2.0 * std::numbers::pi * uniform();
    return {std::cos(phi), std::sin(phi)};
}

} // namespace abp
