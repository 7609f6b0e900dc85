#include "abp/channel_model.hpp"
#include "abp/errors.hpp"
#include "abp/random.hpp"

#include <cmath>
#include <limits>

namespace abp {

std::size_t ChannelInstance::dominant_path() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < paths.size(); ++i)
        if (std::norm(paths[i].gain) > std::norm(paths[best].gain))
            best = i;
    return best;
}

double RicianConfig::k_linear() const { return std::pow(10.0, k_factor_db / 10.0); }
double RicianConfig::los_weight() const {
    const double k = k_linear();
    return std::sqrt(k / (1.0 + k));
}
double RicianConfig::nlos_weight() const { return std::sqrt(1.0 / (1.0 + k_linear())); }

NoiseModel NoiseModel::from_linear(double snr_linear) {
    if (std::isinf(snr_linear) && snr_linear > 0)
        return noiseless();
    if (!(snr_linear > 0.0))
        throw ConfigError("NoiseModel: SNR must be positive");
    return {snr_linear, 1.0 / snr_linear};
}

NoiseModel NoiseModel::from_db(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0)
        return noiseless();
    return from_linear(std::pow(10.0, snr_db / 10.0));
}

NoiseModel NoiseModel::noiseless() { return {std::numeric_limits<double>::infinity(), 0.0}; }

GainLaw parse_gain_law(const std::string &name) {
    if (name == "unit")
        return GainLaw::unit;
    if (name == "complex_normal" || name == "complex-normal")
        return GainLaw::complex_normal;
    if (name == "equal_power" || name == "equal-power")
        return GainLaw::equal_power;
    throw ConfigError("unknown gain law '" + name + "'");
}

std::string to_string(GainLaw law) {
    switch (law) {
    case GainLaw::unit:
        return "unit";
    case GainLaw::complex_normal:
        return "complex_normal";
    case GainLaw::equal_power:
        return "equal_power";
    }
    return "unit";
}

ChannelInstance build_channel(std::span<const PathParams> paths, const UlaConfig &tx_cfg, const UlaConfig &rx_cfg) {
    if (paths.empty())
        throw ConfigError("build_channel: path list is empty");
    tx_cfg.validate();
    rx_cfg.validate();
    const double scale = std::sqrt(static_cast<double>(tx_cfg.num_elements * rx_cfg.num_elements));
    ChannelInstance ch;
    ch.tx_cfg = tx_cfg;
    ch.rx_cfg = rx_cfg;
    ch.paths.assign(paths.begin(), paths.end());
    ch.matrix = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rx_cfg.num_elements),
                                       static_cast<Eigen::Index>(tx_cfg.num_elements));
    for (const auto &p : paths) {
        const SteeringVector at = steering_vector(angle_to_spatial_freq(p.aod, tx_cfg), tx_cfg);
        const SteeringVector ar = steering_vector(angle_to_spatial_freq(p.aoa, rx_cfg), rx_cfg);
        ch.matrix.noalias() += (scale * p.gain) * ar * at.adjoint();
    }
    return ch;
}

std::vector<PathParams> sample_paths(std::uint64_t seed, std::size_t num_paths, AngleRange angle_range,
                                     GainLaw gain_law) {
    if (num_paths < 1)
        throw ConfigError("sample_paths: num_paths must be >= 1");
    if (!(angle_range.lo < angle_range.hi))
        throw ConfigError("sample_paths: empty angle range");
    if (angle_range.lo < -pi / 2 - 1e-12 || angle_range.hi > pi / 2 + 1e-12)
        throw ConfigError("sample_paths: angle range must lie inside [-pi/2, pi/2]");

    CounterRng rng(seed);
    std::vector<PathParams> out(num_paths);
    for (auto &p : out) {
        p.aod.value = rng.uniform(angle_range.lo, angle_range.hi);
        p.aoa.value = rng.uniform(angle_range.lo, angle_range.hi);
        switch (gain_law) {
        case GainLaw::unit:
            p.gain = rng.unit_phase();
            break;
        case GainLaw::complex_normal:
            p.gain = rng.complex_normal(1.0);
            break;
        case GainLaw::equal_power:
            p.gain = rng.unit_phase() / std::sqrt(static_cast<double>(num_paths));
            break;
        }
    }
    return out;
}

ChannelInstance build_rician(const PathParams &los, std::span<const PathParams> nlos, const RicianConfig &cfg,
                             const UlaConfig &tx_cfg, const UlaConfig &rx_cfg) {
    if (cfg.num_nlos < 1)
        throw ConfigError("RicianConfig: num_nlos must be >= 1");
    if (nlos.size() != cfg.num_nlos)
        throw ContractError("build_rician: NLOS path count does not match num_nlos");
    // Fold the weights into the path gains so the instance stays self-consistent
    std::vector<PathParams> all;
    all.reserve(nlos.size() + 1);
    PathParams l = los;
    l.gain *= cfg.los_weight();
    all.push_back(l);
    for (auto p : nlos) {
        p.gain *= cfg.nlos_weight();
        all.push_back(p);
    }
    return build_channel(all, tx_cfg, rx_cfg);
}

namespace {

void check_dims(const ChannelInstance &channel, const Eigen::MatrixXcd &precoder, const Eigen::MatrixXcd &combiner) {
    if (precoder.rows() != channel.matrix.cols())
        throw ContractError("measure: precoder rows must equal N_tot");
    if (combiner.rows() != channel.matrix.rows())
        throw ContractError("measure: combiner rows must equal M_tot");
}

// W^H n for one slot, n ~ CN(0, sigma^2 I)
void add_column_noise(Eigen::Ref<Eigen::VectorXcd> out, const Eigen::MatrixXcd &combiner, double variance,
                      std::uint64_t column_seed) {
    CounterRng rng(column_seed);
    if (combiner.cols() == 1) {
        // a single projection is CN(0, sigma^2 ||w||^2); draw it directly
        out[0] += combiner.col(0).norm() * rng.complex_normal(variance);
        return;
    }
    Eigen::VectorXcd n(combiner.rows());
    for (Eigen::Index i = 0; i < n.size(); ++i)
        n[i] = rng.complex_normal(variance);
    out.noalias() += combiner.adjoint() * n;
}

} // namespace

Eigen::MatrixXcd measure(const ChannelInstance &channel, const Eigen::MatrixXcd &precoder,
                         const Eigen::MatrixXcd &combiner, const NoiseModel &noise, std::uint64_t seed) {
    check_dims(channel, precoder, combiner);
    Eigen::MatrixXcd y = combiner.adjoint() * (channel.matrix * precoder);
    if (noise.is_noiseless())
        return y;
    for (Eigen::Index k = 0; k < y.cols(); ++k)
        add_column_noise(y.col(k), combiner, noise.variance, derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    return y;
}

Eigen::MatrixXcd add_tdm_noise(const Eigen::MatrixXcd &response, const Eigen::MatrixXcd &combiner,
                               const NoiseModel &noise, std::uint64_t seed) {
    if (response.rows() != combiner.cols())
        throw ContractError("add_tdm_noise: response rows must equal combiner columns");
    Eigen::MatrixXcd y = response;
    if (noise.is_noiseless())
        return y;
    for (Eigen::Index l = 0; l < y.rows(); ++l) {
        const double wn = combiner.col(l).norm();
        for (Eigen::Index k = 0; k < y.cols(); ++k) {
            const std::uint64_t slot = derive_seed(seed, {static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(k)});
            CounterRng rng(derive_seed(slot, {0}));
            y(l, k) += wn * rng.complex_normal(noise.variance);
        }
    }
    return y;
}

Eigen::MatrixXcd measure_tdm(const ChannelInstance &channel, const Eigen::MatrixXcd &precoder,
                             const Eigen::MatrixXcd &combiner, const NoiseModel &noise, std::uint64_t seed) {
    check_dims(channel, precoder, combiner);
    return add_tdm_noise(combiner.adjoint() * (channel.matrix * precoder), combiner, noise, seed);
}

double effective_gain(const ChannelInstance &channel, const SteeringVector &f, const SteeringVector &w) {
    if (f.size() != channel.matrix.cols() || w.size() != channel.matrix.rows())
        throw ContractError("effective_gain: beam dimensions do not match the channel");
    return std::norm(w.dot(channel.matrix * f)); // Eigen dot conjugates the left operand
}

} // namespace abp
