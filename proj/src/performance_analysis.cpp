#include "abp/performance_analysis.hpp"
#include "abp/abp_estimator.hpp"
#include "abp/errors.hpp"

#include <cmath>
#include <limits>

namespace abp {

namespace {
constexpr double singular_tol = 1e-12;
}

void VarianceInputs::validate() const {
    rx_cfg.validate();
    if (!(alpha_sq > 0.0) || !(snr_linear > 0.0))
        throw ConfigError("VarianceInputs: |alpha|^2 and SNR must be positive");
    if (!(std::abs(true_rx_freq.value - rx_pair.boresight.value) < rx_pair.offset))
        throw ConfigError("VarianceInputs: receive frequency must lie strictly inside the pair's probing range");
}

VarianceVariant parse_variance_variant(const std::string &name) {
    if (name == "as_written" || name == "as-written")
        return VarianceVariant::as_written;
    if (name == "sum_matrix" || name == "sum-matrix")
        return VarianceVariant::sum_matrix;
    throw ConfigError("unknown variance variant '" + name + "'");
}

std::string to_string(VarianceVariant v) { return v == VarianceVariant::as_written ? "as_written" : "sum_matrix"; }

double slope_k(const AuxiliaryBeamPair &pair) {
    const double d = pair.offset;
    if (!(d > 1e-8 && d < pi))
        throw DomainError("slope_k: offset must lie in (0, pi); the slope diverges as delta -> 0");
    return -std::sin(d) / (1.0 - std::cos(d));
}

double upsilon_sigma(const AuxiliaryBeamPair &pair, const UlaConfig &cfg) {
    return steering_vector(pair.low_freq(), cfg).squaredNorm() + steering_vector(pair.high_freq(), cfg).squaredNorm();
}

double lambda_form(const AuxiliaryBeamPair &pair, const UlaConfig &cfg, SpatialFrequency psi, VarianceVariant v) {
    const double g_low = beam_gain(pair.low_freq(), psi, cfg);
    const double g_high = beam_gain(pair.high_freq(), psi, cfg);
    return v == VarianceVariant::as_written ? g_low - g_high : g_low + g_high;
}

double interference_power(const VarianceInputs &inp) {
    if (!inp.interferers)
        return 0.0;
    const auto &itf = *inp.interferers;
    const double scale = static_cast<double>(itf.tx_cfg.num_elements * inp.rx_cfg.num_elements);
    double acc = 0.0;
    for (const auto &p : itf.paths) {
        // G = alpha a_r(psi') a_t(mu')^H, so the quadratic form factors into
        // |alpha|^2 |a_t(mu')^H f|^2 (|a_low^H a_r|^2 + |a_high^H a_r|^2)
        const SpatialFrequency mu = angle_to_spatial_freq(p.aod, itf.tx_cfg);
        const SpatialFrequency psi = angle_to_spatial_freq(p.aoa, inp.rx_cfg);
        acc += scale * std::norm(p.gain) * beam_gain(mu, itf.tx_beam, itf.tx_cfg) *
               lambda_form(inp.rx_pair, inp.rx_cfg, psi, VarianceVariant::sum_matrix);
    }
    return acc;
}

double variance_from_components(double k, double s_delta, double n_sigma, double ratio) {
    return n_sigma * (1.0 + ratio * ratio) / (2.0 * k * k * s_delta);
}

namespace {

VariancePrediction evaluate(const VarianceInputs &inp, VarianceVariant variant, double noise_plus_interference) {
    inp.validate();
    const double d = inp.rx_pair.offset;
    const double form = std::abs(lambda_form(inp.rx_pair, inp.rx_cfg, inp.true_rx_freq, variant));
    if (form < singular_tol)
        return {std::numeric_limits<double>::infinity(), true};
    const double z = ratio_metric_closed_form(inp.true_rx_freq, inp.rx_pair).value;
    const double one_minus_cos = 1.0 - std::cos(d);
    const double value = one_minus_cos * one_minus_cos * noise_plus_interference * (1.0 + z * z) /
                         (2.0 * inp.alpha_sq * std::sin(d) * std::sin(d) * form);
    return {value, false};
}

} // namespace

VariancePrediction variance_single_path(const VarianceInputs &inp, VarianceVariant variant) {
    const double noise = upsilon_sigma(inp.rx_pair, inp.rx_cfg) / inp.snr_linear;
    return evaluate(inp, variant, noise);
}

VariancePrediction variance_multipath(const VarianceInputs &inp, VarianceVariant variant) {
    const double noise = upsilon_sigma(inp.rx_pair, inp.rx_cfg) / inp.snr_linear + interference_power(inp);
    return evaluate(inp, variant, noise);
}

} // namespace abp
