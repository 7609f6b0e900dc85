#ifndef ABP_CHANNEL_MODEL_HPP
#define ABP_CHANNEL_MODEL_HPP

#include "abp/array_geometry.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace abp {

struct PathParams {
    cd gain{1.0, 0.0};  // g_l; the channel applies sqrt(N*M) on top
    PhysicalAngle aod;  // theta_l
    PhysicalAngle aoa;  // phi_l
};

struct ChannelInstance {
    Eigen::MatrixXcd matrix; // M x N
    std::vector<PathParams> paths;
    UlaConfig tx_cfg;
    UlaConfig rx_cfg;

    // index of the path with the largest |g|, lowest index on ties
    std::size_t dominant_path() const;
};

struct RicianConfig {
    double k_factor_db = 13.2;
    std::size_t num_nlos = 5;

    double k_linear() const;
    double los_weight() const;  // sqrt(K / (1 + K))
    double nlos_weight() const; // sqrt(1 / (1 + K))
};

struct NoiseModel {
    double snr_linear = 1.0; // gamma
    double variance = 1.0;   // sigma^2 = 1 / gamma

    static NoiseModel from_linear(double snr_linear);
    static NoiseModel from_db(double snr_db);
    static NoiseModel noiseless();
    bool is_noiseless() const noexcept { return variance == 0.0; }
};

enum class GainLaw { unit, complex_normal, equal_power };

GainLaw parse_gain_law(const std::string &name);
std::string to_string(GainLaw law);

struct AngleRange {
    double lo = -pi / 2; // radians
    double hi = pi / 2;
};

ChannelInstance build_channel(std::span<const PathParams> paths, const UlaConfig &tx_cfg, const UlaConfig &rx_cfg);

// Uniform AoD/AoA draws over the range, gains per law. Deterministic in the seed.
std::vector<PathParams> sample_paths(std::uint64_t seed, std::size_t num_paths, AngleRange angle_range,
                                     GainLaw gain_law = GainLaw::unit);

ChannelInstance build_rician(const PathParams &los, std::span<const PathParams> nlos, const RicianConfig &cfg,
                             const UlaConfig &tx_cfg, const UlaConfig &rx_cfg);

// W^H H F + W^H n with n ~ CN(0, sigma^2 I) drawn fresh for every precoder column.
// All combiner columns observe the same n within one precoder column.
Eigen::MatrixXcd measure(const ChannelInstance &channel, const Eigen::MatrixXcd &precoder,
                         const Eigen::MatrixXcd &combiner, const NoiseModel &noise, std::uint64_t seed);

// Fully time-multiplexed sweep: entry (l, k) is its own slot with fresh noise,
// identical to measure() called with one column each and seed derive_seed(seed, {l, k}).
Eigen::MatrixXcd measure_tdm(const ChannelInstance &channel, const Eigen::MatrixXcd &precoder,
                             const Eigen::MatrixXcd &combiner, const NoiseModel &noise, std::uint64_t seed);

// Adds slot noise to a precomputed noiseless response W^H H F (same law and keys as measure_tdm).
Eigen::MatrixXcd add_tdm_noise(const Eigen::MatrixXcd &response, const Eigen::MatrixXcd &combiner,
                               const NoiseModel &noise, std::uint64_t seed);

// |w^H H f|^2
double effective_gain(const ChannelInstance &channel, const SteeringVector &f, const SteeringVector &w);

} // namespace abp

#endif
