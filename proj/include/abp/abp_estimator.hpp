#ifndef ABP_ABP_ESTIMATOR_HPP
#define ABP_ABP_ESTIMATOR_HPP

#include "abp/beam_codebook.hpp"
#include "abp/channel_model.hpp"
#include "abp/quantizer.hpp"

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace abp {

struct RatioMetric {
    double value = 0.0; // in [-1, 1]
};

struct PowerPair {
    double delta_power = 0.0; // chi^Delta, from the lower-frequency beam
    double sigma_power = 0.0; // chi^Sigma, from the higher-frequency beam
    AuxiliaryBeamPair pair;
};

struct AngleEstimate {
    SpatialFrequency spatial_freq;
    PhysicalAngle angle;
    int pair_id = -1;
    RatioMetric ratio;
};

struct PairSelection {
    int pair_index = -1;
    PowerPair powers;
    int peak_beam = -1;
};

enum class FeedbackMode { none, ratio, spatial_frequency };

FeedbackMode parse_feedback_mode(const std::string &name);
std::string to_string(FeedbackMode mode);

// How the transmit-side estimate reaches the transmitter. `ratio` quantizes
// zeta before inversion, `spatial_frequency` quantizes mu-hat after it.
struct FeedbackConfig {
    FeedbackMode mode = FeedbackMode::none;
    std::shared_ptr<const ScalarCodebook> codebook;
};

// zeta = -sin(mu - nu) sin(delta) / (1 - cos(mu - nu) cos(delta))
RatioMetric ratio_metric_closed_form(SpatialFrequency freq, const AuxiliaryBeamPair &pair);

// (chi^D - chi^S) / (chi^D + chi^S), clamped to [-1, 1]
RatioMetric ratio_from_powers(const PowerPair &p);

// Closed-form inverse of the ratio metric; result clamped to the probing range
SpatialFrequency invert_ratio(RatioMetric ratio, const AuxiliaryBeamPair &pair);

// Strongest beam, then its stronger neighbour. Ties go to the lower index.
// On a grid spanning a full 2*pi period the two end beams are treated as adjacent.
PairSelection select_pair(std::span<const double> beam_powers, const BeamPairGrid &grid);

// ratio -> (optional feedback quantization) -> inversion -> physical angle
AngleEstimate estimate_angle(const PairSelection &selection, const UlaConfig &cfg, const FeedbackConfig &feedback = {});

struct SinglePathTrace {
    Eigen::MatrixXd powers; // rx beams x tx beams
    int rx_beam = -1;       // receive beam fixed for the AoD side
    int tx_beam = -1;       // transmit beam fixed for the AoA side
    PairSelection tx_selection;
    PairSelection rx_selection;
};

struct SinglePathEstimate {
    AngleEstimate aod;
    AngleEstimate aoa;
    bool out_of_coverage = false;
    SinglePathTrace trace;
};

// Estimation from a measured sweep y (rx beams x tx beams, grid order)
SinglePathEstimate estimate_from_sweep(const Eigen::MatrixXcd &sweep, const BeamPairGrid &grid_tx,
                                       const BeamPairGrid &grid_rx, const FeedbackConfig &feedback = {});

// True when the dominant path falls outside either grid's coverage
bool outside_coverage(const ChannelInstance &channel, const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx);

// Full (N_K+1) x (M_K+1) TDM sweep followed by pair selection and inversion on both sides
SinglePathEstimate estimate_single_path(const ChannelInstance &channel, const BeamPairGrid &grid_tx,
                                        const BeamPairGrid &grid_rx, const NoiseModel &noise, std::uint64_t seed,
                                        const FeedbackConfig &feedback = {});

enum class RowMode { literal, greedy };

RowMode parse_row_mode(const std::string &name);
std::string to_string(RowMode mode);

// Path l -> row of y_block. literal: row l. greedy: unused row with the largest peak power.
std::vector<std::size_t> row_assignment(const Eigen::MatrixXcd &y_block, std::size_t num_paths,
                                        RowMode mode = RowMode::literal);

struct PathTrace {
    std::size_t row = 0;    // row of Y_{m'} used for the AoD side
    std::size_t column = 0; // column of Y_{n'} used for the AoA side
    std::vector<double> tx_powers; // per transmit grid beam
    std::vector<double> rx_powers; // per receive grid beam
    PairSelection tx_selection;
    PairSelection rx_selection;
};

struct MultipathTrace {
    std::size_t rx_probing = 0; // m'_t
    std::size_t tx_probing = 0; // n'_t
    std::vector<PathTrace> paths;
};

struct MultipathEstimate {
    std::vector<std::pair<AngleEstimate, AngleEstimate>> per_path; // (aod, aoa)
    Eigen::MatrixXcd a_t_hat; // N x N_p
    Eigen::MatrixXcd a_r_hat; // M x N_p
    MultipathTrace trace;
};

struct MultipathOptions {
    RowMode row_mode = RowMode::greedy;
    FeedbackConfig feedback;
};

MultipathEstimate estimate_multipath(const ChannelInstance &channel, const ProbingSchedule &schedule,
                                     const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx, const NoiseModel &noise,
                                     std::size_t num_paths, std::uint64_t seed, const MultipathOptions &options = {});

} // namespace abp

#endif
