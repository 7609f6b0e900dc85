#ifndef ABP_BEAM_CODEBOOK_HPP
#define ABP_BEAM_CODEBOOK_HPP

#include "abp/array_geometry.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace abp {

struct FrequencyInterval {
    double lo = -pi;
    double hi = pi;
    double width() const noexcept { return hi - lo; }
    bool operator==(const FrequencyInterval &) const = default;
};

// Two consecutive analog beams at boresight -/+ offset
struct AuxiliaryBeamPair {
    SpatialFrequency boresight; // nu_n or eta_m
    double offset = 0.0;        // delta
    int low_beam_id = 0;        // beam at boresight - offset
    int high_beam_id = 1;       // beam at boresight + offset

    SpatialFrequency low_freq() const noexcept { return {boresight.value - offset}; }
    SpatialFrequency high_freq() const noexcept { return {boresight.value + offset}; }
    // closed probing range [boresight - offset, boresight + offset]
    bool contains(SpatialFrequency f, double tol = 0.0) const noexcept;
};

struct BeamPairGrid {
    std::vector<AuxiliaryBeamPair> pairs;
    std::vector<SpatialFrequency> beam_freqs; // N_K + 1 entries; beam id == index
    FrequencyInterval coverage;
    double offset = 0.0;
    UlaConfig cfg;
    Eigen::MatrixXcd beams; // column k = steering_vector(beam_freqs[k])

    std::size_t num_beams() const noexcept { return beam_freqs.size(); }
    std::size_t num_pairs() const noexcept { return pairs.size(); }
    // First and last beam coincide (grid spans exactly one 2*pi period)
    bool wraps() const noexcept;
    // Throws ContractError when f is not a grid beam frequency
    int beam_id(SpatialFrequency f) const;
    SpatialFrequency beam_freq(int id) const;
    // Pair whose closed probing range holds f; lowest index on shared boundaries
    std::optional<int> pair_containing(SpatialFrequency f) const;
};

BeamPairGrid build_pair_grid(FrequencyInterval coverage, double offset, const UlaConfig &cfg);

// Offset rule used for the link-level experiments: delta = (pi/2) / N
double default_offset(std::size_t num_elements);
// Offset for which the two beam gains share a numerator exactly: delta = pi / N
double exact_offset(std::size_t num_elements);

struct ProbingMatrix {
    std::vector<int> beam_ids;
    Eigen::MatrixXcd weights; // one column per RF chain

    std::size_t width() const noexcept { return beam_ids.size(); }
};

enum class ScheduleMode { exhaustive, random };

ScheduleMode parse_schedule_mode(const std::string &name);
std::string to_string(ScheduleMode mode);

struct ProbingSchedule {
    std::vector<ProbingMatrix> tx_probings; // F_1 ... F_{N_T}
    std::vector<ProbingMatrix> rx_probings; // W_1 ... W_{M_T}
    std::uint64_t seed = 0;
    ScheduleMode mode = ScheduleMode::exhaustive;

    std::vector<int> tx_ids() const; // beam ids of F_T, in column order
    std::vector<int> rx_ids() const;
};

ProbingSchedule random_probing_schedule(const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx, std::size_t n_rf,
                                        std::size_t m_rf, std::size_t n_t, std::size_t m_t, std::uint64_t seed,
                                        ScheduleMode mode = ScheduleMode::exhaustive);

// One beam per slot, grid order on both sides (a plain TDM sweep)
ProbingSchedule sweep_schedule(const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx);

ProbingMatrix make_probing_matrix(const BeamPairGrid &grid, std::vector<int> beam_ids);

struct MonopulseBeams {
    SteeringVector sum;
    SteeringVector difference;
};

// Sum beam a(eta) and the difference beam with its second half negated
MonopulseBeams monopulse_beams(SpatialFrequency boresight, const UlaConfig &cfg);

// |v^H a(mu)|^2 at each grid frequency
std::vector<double> beam_pattern(const Eigen::VectorXcd &vector, std::span<const double> freq_grid);

// Wide beam from the first `active` elements only (unit norm)
SteeringVector subaperture_beam(SpatialFrequency freq, std::size_t active, const UlaConfig &cfg);

} // namespace abp

#endif
