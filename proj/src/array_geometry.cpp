#include "abp/array_geometry.hpp"
#include "abp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace abp {

void UlaConfig::validate() const {
    if (num_elements < 1)
        throw ConfigError("UlaConfig: num_elements must be >= 1");
    if (!(spacing_wavelengths > 0.0 && spacing_wavelengths <= 1.0))
        throw ConfigError("UlaConfig: spacing_wavelengths must lie in (0, 1], got " +
                          std::to_string(spacing_wavelengths));
}

double UlaConfig::max_spatial_freq() const noexcept { return 2.0 * pi * spacing_wavelengths; }

UlaConfig make_ula(std::size_t num_elements, double spacing_wavelengths) {
    UlaConfig cfg{num_elements, spacing_wavelengths};
    cfg.validate();
    return cfg;
}

SpatialFrequency angle_to_spatial_freq(PhysicalAngle angle, const UlaConfig &cfg) {
    if (!std::isfinite(angle.value) || std::abs(angle.value) > pi / 2.0 + 1e-12)
        throw DomainError("angle_to_spatial_freq: |angle| must be <= pi/2");
    return {cfg.max_spatial_freq() * std::sin(angle.value)};
}

PhysicalAngle spatial_freq_to_angle(SpatialFrequency freq, const UlaConfig &cfg) {
    double x = freq.value / cfg.max_spatial_freq();
    if (!std::isfinite(x) || std::abs(x) > 1.0 + 1e-12)
        throw DomainError("spatial_freq_to_angle: |mu| exceeds 2*pi*d/lambda");
    // absorb rounding at the endfire edges
    x = std::clamp(x, -1.0, 1.0);
    return {std::asin(x)};
}

SteeringVector steering_vector(SpatialFrequency freq, const UlaConfig &cfg) {
    const auto n = static_cast<Eigen::Index>(cfg.num_elements);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    SteeringVector a(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double phase = static_cast<double>(k) * freq.value;
        a[k] = cd(scale * std::cos(phase), scale * std::sin(phase));
    }
    return a;
}

double wrap_phase(double x) noexcept {
    double y = std::remainder(x, 2.0 * pi); // in [-pi, pi]
    if (y <= -pi)
        y += 2.0 * pi;
    return y;
}

double dirichlet_gain(double delta, std::size_t n) {
    const double d = wrap_phase(delta);
    if (std::abs(d) < 1e-9)
        return 1.0;
    const double nd = static_cast<double>(n);
    const double num = std::sin(nd * d / 2.0);
    const double den = nd * std::sin(d / 2.0);
    return (num * num) / (den * den);
}

double beam_gain(SpatialFrequency freq_a, SpatialFrequency freq_b, const UlaConfig &cfg) {
    return dirichlet_gain(freq_a.value - freq_b.value, cfg.num_elements);
}

} // namespace abp
