#ifndef ABP_ARRAY_GEOMETRY_HPP
#define ABP_ARRAY_GEOMETRY_HPP

#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <numbers>

namespace abp {

using cd = std::complex<double>;
using SteeringVector = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;

constexpr double deg2rad(double deg) noexcept { return deg * pi / 180.0; }
constexpr double rad2deg(double rad) noexcept { return rad * 180.0 / pi; }

// Uniform linear array. A single element is allowed (omni terminal).
struct UlaConfig {
    std::size_t num_elements = 2;
    double spacing_wavelengths = 0.5; // d / lambda

    void validate() const;
    double max_spatial_freq() const noexcept; // 2*pi*d/lambda
    bool operator==(const UlaConfig &) const = default;
};

// Throws ConfigError when the configuration is invalid.
UlaConfig make_ula(std::size_t num_elements, double spacing_wavelengths = 0.5);

// mu = 2*pi*(d/lambda)*sin(theta), in radians
struct SpatialFrequency {
    double value = 0.0;
    auto operator<=>(const SpatialFrequency &) const = default;
};

// Physical angle in radians, |value| <= pi/2
struct PhysicalAngle {
    double value = 0.0;
    auto operator<=>(const PhysicalAngle &) const = default;
};

SpatialFrequency angle_to_spatial_freq(PhysicalAngle angle, const UlaConfig &cfg);
PhysicalAngle spatial_freq_to_angle(SpatialFrequency freq, const UlaConfig &cfg);

// a(mu) = [1, e^{j mu}, ..., e^{j (N-1) mu}] / sqrt(N)
SteeringVector steering_vector(SpatialFrequency freq, const UlaConfig &cfg);

// |a(freq_a)^H a(freq_b)|^2 via the Dirichlet kernel
double beam_gain(SpatialFrequency freq_a, SpatialFrequency freq_b, const UlaConfig &cfg);

// Same kernel for an arbitrary element count and phase difference
double dirichlet_gain(double delta, std::size_t n);

// Wrap to (-pi, pi]
double wrap_phase(double x) noexcept;

} // namespace abp

#endif
