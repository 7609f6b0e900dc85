#ifndef ABP_PERFORMANCE_ANALYSIS_HPP
#define ABP_PERFORMANCE_ANALYSIS_HPP

#include "abp/beam_codebook.hpp"
#include "abp/channel_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace abp {

// Other paths seen through the transmit beam a_t(nu + delta_t)
struct Interference {
    UlaConfig tx_cfg;
    SpatialFrequency tx_beam; // nu + delta_t
    std::vector<PathParams> paths; // gains are g; alpha = sqrt(N*M) g
};

struct VarianceInputs {
    AuxiliaryBeamPair rx_pair;
    UlaConfig rx_cfg;
    SpatialFrequency true_rx_freq; // psi
    double alpha_sq = 0.0;         // |alpha|^2
    double snr_linear = 1.0;       // gamma
    std::optional<Interference> interferers;

    void validate() const;
};

enum class VarianceVariant { as_written, sum_matrix };

VarianceVariant parse_variance_variant(const std::string &name);
std::string to_string(VarianceVariant v);

struct VariancePrediction {
    double value = 0.0;     // +inf when divergent
    bool divergent = false; // denominator quadratic form vanished
};

// Slope of the ratio metric at boresight: -sin(delta) / (1 - cos(delta)).
// Throws DomainError for delta outside (0, pi) or below 1e-8.
double slope_k(const AuxiliaryBeamPair &pair);

// Upsilon_Sigma = |a(eta-delta)|^2 + |a(eta+delta)|^2
double upsilon_sigma(const AuxiliaryBeamPair &pair, const UlaConfig &cfg);
// a(psi)^H Lambda a(psi) for Lambda_Delta (difference of projectors) or Lambda_Sigma (sum)
double lambda_form(const AuxiliaryBeamPair &pair, const UlaConfig &cfg, SpatialFrequency psi, VarianceVariant v);

// Interference term: sum over paths of |a_t^H G^H Lambda_Sigma G a_t|
double interference_power(const VarianceInputs &inp);

// sigma^2 ~= N (1 + M^2) / (2 k^2 S)
double variance_from_components(double k, double s_delta, double n_sigma, double ratio);

VariancePrediction variance_single_path(const VarianceInputs &inp, VarianceVariant variant);

// Same shape with the noise term replaced by noise plus multipath interference
VariancePrediction variance_multipath(const VarianceInputs &inp, VarianceVariant variant = VarianceVariant::sum_matrix);

} // namespace abp

#endif
