#ifndef ABP_SIM_HARNESS_HPP
#define ABP_SIM_HARNESS_HPP

#include "abp/abp_estimator.hpp"
#include "abp/beam_codebook.hpp"
#include "abp/channel_model.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace abp {

enum class ExperimentKind { single_path_mse, variance, quantization, multipath_mse, maee, control_channel, rician };

ExperimentKind parse_experiment_kind(const std::string &name);
std::string to_string(ExperimentKind kind); // CLI subcommand spelling

enum class OffsetRule {
    standard,   // delta = (pi/2) / N
    exact,      // delta = pi / N
    fixed       // delta_tx / delta_rx taken from the config
};

OffsetRule parse_offset_rule(const std::string &name);
std::string to_string(OffsetRule rule);

struct ArraySize {
    std::size_t n_tx = 16;
    std::size_t n_rx = 16;
};

struct ProbingBudget {
    std::size_t n_t = 20;
    std::size_t m_t = 20;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::single_path_mse;
    std::vector<ArraySize> arrays{{16, 16}};
    double spacing = 0.5;
    OffsetRule offset_rule = OffsetRule::standard;
    double delta_tx = 0.0; // radians, used with OffsetRule::fixed
    double delta_rx = 0.0;
    FrequencyInterval coverage{-pi, pi};
    std::vector<double> snr_db{-10, -5, 0, 5, 10, 15, 20}; // +inf means noiseless
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    std::size_t threads = 0; // 0: hardware concurrency

    GainLaw gain_law = GainLaw::unit;
    AngleRange angle_range{-pi / 2, pi / 2};

    // AoD feedback; bits == 0 disables quantization
    FeedbackMode feedback = FeedbackMode::none;
    unsigned bits = 0;
    std::vector<unsigned> bits_list{1, 2, 3, 4, 5, 6};
    std::size_t codebook_samples = 300000;

    // variance validation
    std::vector<std::size_t> num_paths{1, 8};
    double psi = 0.0;      // receive spatial frequency of the estimated path
    double theta = 0.0;    // its AoD (transmit beam aligned to it)
    AngleRange interferer_range{-pi / 4, pi / 4};

    // multi-path
    std::vector<ProbingBudget> budgets{{20, 20}};
    std::size_t n_rf = 3;
    std::size_t m_rf = 3;
    std::size_t paths = 3;
    ScheduleMode schedule_mode = ScheduleMode::exhaustive;
    RowMode row_mode = RowMode::greedy;

    // rician
    std::vector<double> k_factor_db{2.0, 8.0, 13.2};
    std::size_t num_nlos = 5;

    // maee trade-off table: N_ant values (n_tx = n_rx = N_ant)
    std::vector<std::size_t> tradeoff_sizes{4, 8, 16, 32};

    // control channel, in spatial-frequency degrees
    double sector_deg = 120.0;
    std::vector<double> beam_widths_deg{60.0, 15.0, 3.75};

    std::string output; // CSV path, empty for stdout

    void validate() const;
    double offset_tx(std::size_t n) const;
    double offset_rx(std::size_t m) const;
};

// Defaults matching each experiment's reference setup
ExperimentConfig default_config(ExperimentKind kind);

// Apply a JSON or TOML descriptor on top of default_config(kind). Unknown keys are errors.
ExperimentConfig config_from_json(const std::string &text, ExperimentKind kind);
ExperimentConfig config_from_toml(const std::string &text, ExperimentKind kind);
// Format chosen by extension: .toml -> TOML, anything else JSON
ExperimentConfig load_config(const std::string &path, ExperimentKind kind);
std::string config_to_json(const ExperimentConfig &cfg);

struct MetricRow {
    std::vector<std::pair<std::string, std::string>> point; // config echo, ordered
    std::string metric;
    double value = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;

    std::string point_string() const; // "k1=v1;k2=v2"
};

struct MetricReport {
    std::string experiment;
    std::vector<MetricRow> rows;

    void add(std::vector<std::pair<std::string, std::string>> point, std::string metric, double value,
             std::size_t trials, std::uint64_t seed);
    // Row whose point contains every given key/value and whose metric matches; throws if absent
    const MetricRow &find(const std::string &metric, const std::map<std::string, std::string> &where = {}) const;
    double value(const std::string &metric, const std::map<std::string, std::string> &where = {}) const;

    std::string to_csv() const;
    std::string to_json() const;
};

// Stable textual form of numbers used in config echoes ("10", "13.2", "inf")
std::string format_number(double v);

MetricReport run_single_path_mse(const ExperimentConfig &cfg);
MetricReport run_variance_validation(const ExperimentConfig &cfg);
MetricReport run_quantization_study(const ExperimentConfig &cfg);
MetricReport run_multipath_matrix_mse(const ExperimentConfig &cfg);
MetricReport run_maee_tradeoff(const ExperimentConfig &cfg);
MetricReport run_control_channel(const ExperimentConfig &cfg);
MetricReport run_rician_study(const ExperimentConfig &cfg);
MetricReport run_experiment(const ExperimentConfig &cfg);

// Noiseless ratio metrics of the pair picked for uniformly drawn AoDs (single-antenna receiver)
std::vector<double> ratio_training_samples(const BeamPairGrid &grid_tx, std::size_t count, std::uint64_t seed,
                                           AngleRange angle_range = {-pi / 2, pi / 2});

// Expected ||a(mu) - a(nearest beam)||^2 for one path with uniform AoD, by quadrature
double gob_quantization_floor(const BeamPairGrid &grid, AngleRange angle_range = {-pi / 2, pi / 2},
                              std::size_t nodes = 20000);

// min over column permutations of ||A - A_hat P||_F^2
double matched_matrix_error(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &a_hat);

// Run fn(i) for i in [0, n) on a worker pool; fn must only write to slot i of its own output
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)> &fn);

} // namespace abp

#endif
