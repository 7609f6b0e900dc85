#include "abp/abp_estimator.hpp"
#include "abp/errors.hpp"
#include "abp/random.hpp"

#include <algorithm>
#include <cmath>

namespace abp {

FeedbackMode parse_feedback_mode(const std::string &name) {
    if (name == "none")
        return FeedbackMode::none;
    if (name == "ratio")
        return FeedbackMode::ratio;
    if (name == "spatial_frequency" || name == "spatial-frequency" || name == "frequency")
        return FeedbackMode::spatial_frequency;
    throw ConfigError("unknown feedback mode '" + name + "'");
}

std::string to_string(FeedbackMode mode) {
    switch (mode) {
    case FeedbackMode::none:
        return "none";
    case FeedbackMode::ratio:
        return "ratio";
    case FeedbackMode::spatial_frequency:
        return "spatial_frequency";
    }
    return "none";
}

RowMode parse_row_mode(const std::string &name) {
    if (name == "literal")
        return RowMode::literal;
    if (name == "greedy")
        return RowMode::greedy;
    throw ConfigError("unknown row mode '" + name + "'");
}

std::string to_string(RowMode mode) { return mode == RowMode::literal ? "literal" : "greedy"; }

RatioMetric ratio_metric_closed_form(SpatialFrequency freq, const AuxiliaryBeamPair &pair) {
    const double x = freq.value - pair.boresight.value;
    const double den = 1.0 - std::cos(x) * std::cos(pair.offset);
    if (den <= 0.0) // only at x = 0 mod 2*pi with delta = 0, excluded by the pair invariant
        return {0.0};
    return {-std::sin(x) * std::sin(pair.offset) / den};
}

RatioMetric ratio_from_powers(const PowerPair &p) {
    if (!(p.delta_power >= 0.0) || !(p.sigma_power >= 0.0) || !std::isfinite(p.delta_power) ||
        !std::isfinite(p.sigma_power))
        throw ContractError("ratio_from_powers: powers must be finite and nonnegative");
    const double sum = p.delta_power + p.sigma_power;
    if (sum <= 0.0)
        throw DegenerateMeasurement("ratio_from_powers: both beam powers are zero");
    return {std::clamp((p.delta_power - p.sigma_power) / sum, -1.0, 1.0)};
}

SpatialFrequency invert_ratio(RatioMetric ratio, const AuxiliaryBeamPair &pair) {
    const double z = std::clamp(ratio.value, -1.0, 1.0);
    const double s = std::sin(pair.offset);
    const double c = std::cos(pair.offset);
    const double num = z * s - z * std::sqrt(1.0 - z * z) * s * c;
    const double den = s * s + z * z * c * c;
    const double arg = std::clamp(num / den, -1.0, 1.0);
    const double nu = pair.boresight.value;
    return {std::clamp(nu - std::asin(arg), nu - pair.offset, nu + pair.offset)};
}

namespace {

std::size_t argmax_lowest(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best])
            best = i;
    return best;
}

} // namespace

PairSelection select_pair(std::span<const double> beam_powers, const BeamPairGrid &grid) {
    if (beam_powers.empty())
        throw ContractError("select_pair: no beam powers");
    if (beam_powers.size() != grid.num_beams())
        throw ContractError("select_pair: expected one power per grid beam");
    if (grid.num_pairs() == 0)
        throw ContractError("select_pair: grid has no pairs");

    const int b = static_cast<int>(beam_powers.size());
    const int peak = static_cast<int>(argmax_lowest(beam_powers));
    const bool wrap = grid.wraps();

    // neighbour ids; -1 when absent. On a wrapped grid beam 0 and beam b-1 coincide.
    int left = peak - 1;
    int right = peak + 1 < b ? peak + 1 : -1;
    if (left < 0)
        left = wrap ? b - 2 : -1;
    if (peak == b - 1 && wrap)
        right = 1;
    if (left == peak)
        left = -1;
    if (right == peak)
        right = -1;

    int neighbour;
    if (left < 0)
        neighbour = right;
    else if (right < 0)
        neighbour = left;
    else {
        const double pl = beam_powers[static_cast<std::size_t>(left)];
        const double pr = beam_powers[static_cast<std::size_t>(right)];
        if (pl > pr)
            neighbour = left;
        else if (pr > pl)
            neighbour = right;
        else
            neighbour = std::min(left, right);
    }

    int pair_index;
    if (neighbour == peak - 1)
        pair_index = peak - 1;
    else if (neighbour == peak + 1)
        pair_index = peak;
    else if (peak == 0) // wrapped: pair (b-2, b-1), beam b-1 is beam 0
        pair_index = b - 2;
    else // peak == b-1 wrapped onto pair (0, 1)
        pair_index = 0;

    PairSelection sel;
    sel.pair_index = pair_index;
    sel.peak_beam = peak;
    sel.powers.pair = grid.pairs[static_cast<std::size_t>(pair_index)];
    sel.powers.delta_power = beam_powers[static_cast<std::size_t>(sel.powers.pair.low_beam_id)];
    sel.powers.sigma_power = beam_powers[static_cast<std::size_t>(sel.powers.pair.high_beam_id)];
    return sel;
}

AngleEstimate estimate_angle(const PairSelection &selection, const UlaConfig &cfg, const FeedbackConfig &feedback) {
    if (feedback.mode != FeedbackMode::none && !feedback.codebook)
        throw ConfigError("estimate_angle: feedback enabled without a codebook");
    const auto &pair = selection.powers.pair;
    RatioMetric z = ratio_from_powers(selection.powers);
    if (feedback.mode == FeedbackMode::ratio)
        z.value = quantize(z.value, *feedback.codebook).codeword;
    SpatialFrequency mu = invert_ratio(z, pair);
    if (feedback.mode == FeedbackMode::spatial_frequency)
        mu.value = quantize(mu.value, *feedback.codebook).codeword;

    AngleEstimate est;
    est.spatial_freq = mu;
    est.ratio = z;
    est.pair_id = selection.pair_index;
    const double lim = cfg.max_spatial_freq();
    est.angle = spatial_freq_to_angle({std::clamp(mu.value, -lim, lim)}, cfg);
    return est;
}

SinglePathEstimate estimate_from_sweep(const Eigen::MatrixXcd &sweep, const BeamPairGrid &grid_tx,
                                       const BeamPairGrid &grid_rx, const FeedbackConfig &feedback) {
    if (sweep.rows() != static_cast<Eigen::Index>(grid_rx.num_beams()) ||
        sweep.cols() != static_cast<Eigen::Index>(grid_tx.num_beams()))
        throw ContractError("estimate_from_sweep: sweep must be (rx beams) x (tx beams)");

    SinglePathEstimate out;
    auto &tr = out.trace;
    tr.powers = sweep.cwiseAbs2();

    // same rule as the multi-chain selection: strongest total row / column
    const Eigen::VectorXd row_energy = tr.powers.rowwise().sum();
    const Eigen::VectorXd col_energy = tr.powers.colwise().sum().transpose();
    tr.rx_beam = static_cast<int>(argmax_lowest({row_energy.data(), static_cast<std::size_t>(row_energy.size())}));
    tr.tx_beam = static_cast<int>(argmax_lowest({col_energy.data(), static_cast<std::size_t>(col_energy.size())}));

    std::vector<double> tx_p(static_cast<std::size_t>(tr.powers.cols()));
    for (Eigen::Index k = 0; k < tr.powers.cols(); ++k)
        tx_p[static_cast<std::size_t>(k)] = tr.powers(tr.rx_beam, k);
    std::vector<double> rx_p(static_cast<std::size_t>(tr.powers.rows()));
    for (Eigen::Index l = 0; l < tr.powers.rows(); ++l)
        rx_p[static_cast<std::size_t>(l)] = tr.powers(l, tr.tx_beam);

    tr.tx_selection = select_pair(tx_p, grid_tx);
    tr.rx_selection = select_pair(rx_p, grid_rx);
    out.aod = estimate_angle(tr.tx_selection, grid_tx.cfg, feedback);
    out.aoa = estimate_angle(tr.rx_selection, grid_rx.cfg);
    return out;
}

bool outside_coverage(const ChannelInstance &channel, const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx) {
    const auto &p = channel.paths[channel.dominant_path()];
    const double mu = angle_to_spatial_freq(p.aod, channel.tx_cfg).value;
    const double psi = angle_to_spatial_freq(p.aoa, channel.rx_cfg).value;
    constexpr double tol = 1e-12;
    return mu < grid_tx.coverage.lo - tol || mu > grid_tx.coverage.hi + tol || psi < grid_rx.coverage.lo - tol ||
           psi > grid_rx.coverage.hi + tol;
}

namespace {

void check_grid(const BeamPairGrid &grid, const UlaConfig &cfg, const char *side) {
    if (grid.cfg.num_elements != cfg.num_elements)
        throw ContractError(std::string(side) + " grid was built for a different array size");
}

} // namespace

SinglePathEstimate estimate_single_path(const ChannelInstance &channel, const BeamPairGrid &grid_tx,
                                        const BeamPairGrid &grid_rx, const NoiseModel &noise, std::uint64_t seed,
                                        const FeedbackConfig &feedback) {
    check_grid(grid_tx, channel.tx_cfg, "transmit");
    check_grid(grid_rx, channel.rx_cfg, "receive");
    const Eigen::MatrixXcd y = measure_tdm(channel, grid_tx.beams, grid_rx.beams, noise, seed);
    SinglePathEstimate out = estimate_from_sweep(y, grid_tx, grid_rx, feedback);
    out.out_of_coverage = outside_coverage(channel, grid_tx, grid_rx);
    return out;
}

std::vector<std::size_t> row_assignment(const Eigen::MatrixXcd &y_block, std::size_t num_paths, RowMode mode) {
    const auto rows = static_cast<std::size_t>(y_block.rows());
    if (num_paths > rows)
        throw ContractError("row_assignment: more paths than rows");
    std::vector<std::size_t> out(num_paths);
    if (mode == RowMode::literal) {
        for (std::size_t l = 0; l < num_paths; ++l)
            out[l] = l;
        return out;
    }
    std::vector<double> peak(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        peak[r] = y_block.row(static_cast<Eigen::Index>(r)).cwiseAbs2().maxCoeff();
    std::vector<bool> used(rows, false);
    for (std::size_t l = 0; l < num_paths; ++l) {
        std::size_t best = rows;
        for (std::size_t r = 0; r < rows; ++r)
            if (!used[r] && (best == rows || peak[r] > peak[best]))
                best = r;
        used[best] = true;
        out[l] = best;
    }
    return out;
}

namespace {

// First occurrence of every grid beam in the concatenated id list, -1 if absent
std::vector<int> first_positions(const std::vector<int> &ids, std::size_t num_beams) {
    std::vector<int> pos(num_beams, -1);
    for (std::size_t u = 0; u < ids.size(); ++u) {
        const int b = ids[u];
        if (b >= 0 && static_cast<std::size_t>(b) < num_beams && pos[static_cast<std::size_t>(b)] < 0)
            pos[static_cast<std::size_t>(b)] = static_cast<int>(u);
    }
    return pos;
}

std::vector<int> missing_pairs(const BeamPairGrid &grid, const std::vector<int> &pos) {
    std::vector<int> out;
    for (std::size_t i = 0; i < grid.num_pairs(); ++i) {
        const auto &p = grid.pairs[i];
        if (pos[static_cast<std::size_t>(p.low_beam_id)] < 0 || pos[static_cast<std::size_t>(p.high_beam_id)] < 0)
            out.push_back(static_cast<int>(i));
    }
    return out;
}

std::size_t min_width(const std::vector<ProbingMatrix> &ms) {
    std::size_t w = ms.front().width();
    for (const auto &m : ms)
        w = std::min(w, m.width());
    return w;
}

} // namespace

MultipathEstimate estimate_multipath(const ChannelInstance &channel, const ProbingSchedule &schedule,
                                     const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx, const NoiseModel &noise,
                                     std::size_t num_paths, std::uint64_t seed, const MultipathOptions &options) {
    check_grid(grid_tx, channel.tx_cfg, "transmit");
    check_grid(grid_rx, channel.rx_cfg, "receive");
    if (schedule.tx_probings.empty() || schedule.rx_probings.empty())
        throw ContractError("estimate_multipath: empty probing schedule");
    if (num_paths < 1 || num_paths > std::min(min_width(schedule.tx_probings), min_width(schedule.rx_probings)))
        throw ContractError("estimate_multipath: num_paths must be in [1, min(N_RF, M_RF)]");

    const std::vector<int> tx_ids = schedule.tx_ids();
    const std::vector<int> rx_ids = schedule.rx_ids();
    const std::vector<int> tx_pos = first_positions(tx_ids, grid_tx.num_beams());
    const std::vector<int> rx_pos = first_positions(rx_ids, grid_rx.num_beams());
    {
        auto mt = missing_pairs(grid_tx, tx_pos);
        auto mr = missing_pairs(grid_rx, rx_pos);
        if (!mt.empty() || !mr.empty())
            throw EstimationIncomplete("estimate_multipath: schedule does not cover every beam pair", std::move(mt),
                                       std::move(mr));
    }

    const std::size_t m_t = schedule.rx_probings.size();
    const std::size_t n_t = schedule.tx_probings.size();
    std::vector<Eigen::Index> tx_off(n_t + 1, 0), rx_off(m_t + 1, 0);
    for (std::size_t n = 0; n < n_t; ++n)
        tx_off[n + 1] = tx_off[n] + static_cast<Eigen::Index>(schedule.tx_probings[n].width());
    for (std::size_t m = 0; m < m_t; ++m)
        rx_off[m + 1] = rx_off[m] + static_cast<Eigen::Index>(schedule.rx_probings[m].width());

    // Every (W_m, F_n) block is one probing slot with its own noise
    Eigen::MatrixXcd y_all(rx_off[m_t], tx_off[n_t]);
    for (std::size_t m = 0; m < m_t; ++m)
        for (std::size_t n = 0; n < n_t; ++n)
            y_all.block(rx_off[m], tx_off[n], rx_off[m + 1] - rx_off[m], tx_off[n + 1] - tx_off[n]) =
                measure(channel, schedule.tx_probings[n].weights, schedule.rx_probings[m].weights, noise,
                        derive_seed(seed, {m, n}));

    const Eigen::MatrixXd pw = y_all.cwiseAbs2();
    std::vector<double> row_e(m_t, 0.0), col_e(n_t, 0.0);
    for (std::size_t m = 0; m < m_t; ++m)
        row_e[m] = pw.middleRows(rx_off[m], rx_off[m + 1] - rx_off[m]).sum();
    for (std::size_t n = 0; n < n_t; ++n)
        col_e[n] = pw.middleCols(tx_off[n], tx_off[n + 1] - tx_off[n]).sum();

    MultipathEstimate out;
    auto &tr = out.trace;
    tr.rx_probing = argmax_lowest(row_e);
    tr.tx_probing = argmax_lowest(col_e);
    const Eigen::MatrixXcd y_m = y_all.middleRows(rx_off[tr.rx_probing], rx_off[tr.rx_probing + 1] - rx_off[tr.rx_probing]);
    const Eigen::MatrixXcd y_n = y_all.middleCols(tx_off[tr.tx_probing], tx_off[tr.tx_probing + 1] - tx_off[tr.tx_probing]);

    const auto rows = row_assignment(y_m, num_paths, options.row_mode);
    const auto cols = row_assignment(y_n.transpose(), num_paths, options.row_mode);

    out.a_t_hat.resize(static_cast<Eigen::Index>(channel.tx_cfg.num_elements), static_cast<Eigen::Index>(num_paths));
    out.a_r_hat.resize(static_cast<Eigen::Index>(channel.rx_cfg.num_elements), static_cast<Eigen::Index>(num_paths));
    for (std::size_t l = 0; l < num_paths; ++l) {
        PathTrace pt;
        pt.row = rows[l];
        pt.column = cols[l];
        pt.tx_powers.resize(grid_tx.num_beams());
        for (std::size_t b = 0; b < grid_tx.num_beams(); ++b)
            pt.tx_powers[b] = std::norm(y_m(static_cast<Eigen::Index>(pt.row), tx_pos[b]));
        pt.rx_powers.resize(grid_rx.num_beams());
        for (std::size_t b = 0; b < grid_rx.num_beams(); ++b)
            pt.rx_powers[b] = std::norm(y_n(rx_pos[b], static_cast<Eigen::Index>(pt.column)));
        pt.tx_selection = select_pair(pt.tx_powers, grid_tx);
        pt.rx_selection = select_pair(pt.rx_powers, grid_rx);

        AngleEstimate aod = estimate_angle(pt.tx_selection, grid_tx.cfg, options.feedback);
        AngleEstimate aoa = estimate_angle(pt.rx_selection, grid_rx.cfg);
        out.a_t_hat.col(static_cast<Eigen::Index>(l)) = steering_vector(aod.spatial_freq, channel.tx_cfg);
        out.a_r_hat.col(static_cast<Eigen::Index>(l)) = steering_vector(aoa.spatial_freq, channel.rx_cfg);
        out.per_path.emplace_back(aod, aoa);
        tr.paths.push_back(std::move(pt));
    }
    return out;
}

} // namespace abp
