#include "abp/beam_codebook.hpp"
#include "abp/errors.hpp"
#include "abp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace abp {

namespace {
constexpr double grid_tol = 1e-9;
}

bool AuxiliaryBeamPair::contains(SpatialFrequency f, double tol) const noexcept {
    return f.value >= boresight.value - offset - tol && f.value <= boresight.value + offset + tol;
}

bool BeamPairGrid::wraps() const noexcept {
    if (beam_freqs.size() < 2)
        return false;
    return std::abs((beam_freqs.back().value - beam_freqs.front().value) - 2.0 * pi) < grid_tol;
}

int BeamPairGrid::beam_id(SpatialFrequency f) const {
    const double pos = (f.value - coverage.lo) / (2.0 * offset);
    const double k = std::round(pos);
    if (k < 0 || k >= static_cast<double>(beam_freqs.size()) ||
        std::abs(beam_freqs[static_cast<std::size_t>(k)].value - f.value) > grid_tol)
        throw ContractError("beam_id: frequency is not a beam of this grid");
    return static_cast<int>(k);
}

SpatialFrequency BeamPairGrid::beam_freq(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= beam_freqs.size())
        throw ContractError("beam_freq: unknown beam id " + std::to_string(id));
    return beam_freqs[static_cast<std::size_t>(id)];
}

std::optional<int> BeamPairGrid::pair_containing(SpatialFrequency f) const {
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (pairs[i].contains(f, grid_tol))
            return static_cast<int>(i);
    return std::nullopt;
}

BeamPairGrid build_pair_grid(FrequencyInterval coverage, double offset, const UlaConfig &cfg) {
    cfg.validate();
    if (!std::isfinite(coverage.lo) || !std::isfinite(coverage.hi) || !(coverage.hi > coverage.lo))
        throw ConfigError("build_pair_grid: degenerate coverage interval");
    if (!(offset > 0.0 && offset < pi))
        throw ConfigError("build_pair_grid: offset must lie in (0, pi)");
    if (coverage.width() < 2.0 * offset - grid_tol)
        throw ConfigError("build_pair_grid: coverage narrower than one pair");

    const auto n_k = static_cast<std::size_t>(std::ceil(coverage.width() / (2.0 * offset) - grid_tol));
    BeamPairGrid g;
    g.coverage = coverage;
    g.offset = offset;
    g.cfg = cfg;
    g.beam_freqs.reserve(n_k + 1);
    for (std::size_t k = 0; k <= n_k; ++k)
        g.beam_freqs.push_back({coverage.lo + 2.0 * static_cast<double>(k) * offset});
    g.pairs.reserve(n_k);
    for (std::size_t i = 0; i < n_k; ++i)
        g.pairs.push_back({{coverage.lo + (2.0 * static_cast<double>(i) + 1.0) * offset},
                           offset,
                           static_cast<int>(i),
                           static_cast<int>(i + 1)});
    g.beams.resize(static_cast<Eigen::Index>(cfg.num_elements), static_cast<Eigen::Index>(n_k + 1));
    for (std::size_t k = 0; k <= n_k; ++k)
        g.beams.col(static_cast<Eigen::Index>(k)) = steering_vector(g.beam_freqs[k], cfg);
    return g;
}

double default_offset(std::size_t num_elements) { return (pi / 2.0) / static_cast<double>(num_elements); }
double exact_offset(std::size_t num_elements) { return pi / static_cast<double>(num_elements); }

ScheduleMode parse_schedule_mode(const std::string &name) {
    if (name == "exhaustive")
        return ScheduleMode::exhaustive;
    if (name == "random")
        return ScheduleMode::random;
    throw ConfigError("unknown schedule mode '" + name + "'");
}

std::string to_string(ScheduleMode mode) { return mode == ScheduleMode::exhaustive ? "exhaustive" : "random"; }

namespace {

std::vector<int> concat_ids(const std::vector<ProbingMatrix> &ms) {
    std::vector<int> ids;
    for (const auto &m : ms)
        ids.insert(ids.end(), m.beam_ids.begin(), m.beam_ids.end());
    return ids;
}

// n distinct beams out of [0, count), optionally excluding some
std::vector<int> random_subset(CounterRng &rng, std::size_t count, std::size_t n, const std::vector<int> &exclude) {
    std::vector<int> pool;
    for (std::size_t b = 0; b < count; ++b)
        if (std::find(exclude.begin(), exclude.end(), static_cast<int>(b)) == exclude.end())
            pool.push_back(static_cast<int>(b));
    // partial Fisher-Yates
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    return pool;
}

std::vector<ProbingMatrix> random_side(const BeamPairGrid &grid, std::size_t rf, std::size_t slots, CounterRng &rng,
                                       ScheduleMode mode, const char *side) {
    const std::size_t beams = grid.num_beams();
    if (rf < 1 || rf > beams)
        throw ConfigError(std::string("random_probing_schedule: ") + side + " RF chain count must be in [1, beam count]");
    if (slots < 1)
        throw ConfigError(std::string("random_probing_schedule: ") + side + " probing count must be >= 1");
    if (mode == ScheduleMode::exhaustive && rf * slots < beams)
        throw ConfigError(std::string("random_probing_schedule: ") + side +
                          " slots cannot cover every grid beam in exhaustive mode");

    std::vector<std::vector<int>> cols(slots);
    std::size_t first_random = 0;
    if (mode == ScheduleMode::exhaustive) {
        std::vector<int> perm(beams);
        std::iota(perm.begin(), perm.end(), 0);
        shuffle(perm, rng);
        const std::size_t covering = (beams + rf - 1) / rf;
        for (std::size_t j = 0; j < covering; ++j) {
            const std::size_t b0 = j * rf, b1 = std::min(beams, b0 + rf);
            cols[j].assign(perm.begin() + static_cast<std::ptrdiff_t>(b0), perm.begin() + static_cast<std::ptrdiff_t>(b1));
            if (cols[j].size() < rf) {
                auto extra = random_subset(rng, beams, rf - cols[j].size(), cols[j]);
                cols[j].insert(cols[j].end(), extra.begin(), extra.end());
            }
        }
        first_random = covering;
    }
    for (std::size_t j = first_random; j < slots; ++j)
        cols[j] = random_subset(rng, beams, rf, {});
    if (mode == ScheduleMode::exhaustive)
        shuffle(cols, rng);

    std::vector<ProbingMatrix> out;
    out.reserve(slots);
    for (auto &c : cols)
        out.push_back(make_probing_matrix(grid, std::move(c)));
    return out;
}

} // namespace

std::vector<int> ProbingSchedule::tx_ids() const { return concat_ids(tx_probings); }
std::vector<int> ProbingSchedule::rx_ids() const { return concat_ids(rx_probings); }

ProbingMatrix make_probing_matrix(const BeamPairGrid &grid, std::vector<int> beam_ids) {
    ProbingMatrix m;
    m.weights.resize(static_cast<Eigen::Index>(grid.cfg.num_elements), static_cast<Eigen::Index>(beam_ids.size()));
    for (std::size_t c = 0; c < beam_ids.size(); ++c) {
        const int id = beam_ids[c];
        if (id < 0 || static_cast<std::size_t>(id) >= grid.num_beams())
            throw ContractError("make_probing_matrix: unknown beam id " + std::to_string(id));
        m.weights.col(static_cast<Eigen::Index>(c)) = grid.beams.col(id);
    }
    m.beam_ids = std::move(beam_ids);
    return m;
}

ProbingSchedule random_probing_schedule(const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx, std::size_t n_rf,
                                        std::size_t m_rf, std::size_t n_t, std::size_t m_t, std::uint64_t seed,
                                        ScheduleMode mode) {
    ProbingSchedule s;
    s.seed = seed;
    s.mode = mode;
    CounterRng tx_rng(derive_seed(seed, {0}));
    CounterRng rx_rng(derive_seed(seed, {1}));
    s.tx_probings = random_side(grid_tx, n_rf, n_t, tx_rng, mode, "transmit");
    s.rx_probings = random_side(grid_rx, m_rf, m_t, rx_rng, mode, "receive");
    return s;
}

ProbingSchedule sweep_schedule(const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx) {
    ProbingSchedule s;
    for (std::size_t b = 0; b < grid_tx.num_beams(); ++b)
        s.tx_probings.push_back(make_probing_matrix(grid_tx, {static_cast<int>(b)}));
    for (std::size_t b = 0; b < grid_rx.num_beams(); ++b)
        s.rx_probings.push_back(make_probing_matrix(grid_rx, {static_cast<int>(b)}));
    return s;
}

MonopulseBeams monopulse_beams(SpatialFrequency boresight, const UlaConfig &cfg) {
    if (cfg.num_elements % 2 != 0)
        throw ConfigError("monopulse_beams: difference beam needs an even element count");
    MonopulseBeams mb;
    mb.sum = steering_vector(boresight, cfg);
    mb.difference = mb.sum;
    const auto half = static_cast<Eigen::Index>(cfg.num_elements / 2);
    mb.difference.tail(half) *= -1.0;
    return mb;
}

std::vector<double> beam_pattern(const Eigen::VectorXcd &vector, std::span<const double> freq_grid) {
    if (freq_grid.empty())
        throw ContractError("beam_pattern: empty frequency grid");
    const UlaConfig cfg{static_cast<std::size_t>(vector.size()), 0.5};
    std::vector<double> out;
    out.reserve(freq_grid.size());
    for (double mu : freq_grid)
        out.push_back(std::norm(vector.dot(steering_vector({mu}, cfg))));
    return out;
}

SteeringVector subaperture_beam(SpatialFrequency freq, std::size_t active, const UlaConfig &cfg) {
    if (active < 1 || active > cfg.num_elements)
        throw ConfigError("subaperture_beam: active element count must be in [1, N]");
    SteeringVector v = SteeringVector::Zero(static_cast<Eigen::Index>(cfg.num_elements));
    v.head(static_cast<Eigen::Index>(active)) = steering_vector(freq, UlaConfig{active, cfg.spacing_wavelengths});
    return v;
}

} // namespace abp
