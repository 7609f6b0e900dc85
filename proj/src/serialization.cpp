#include "abp/serialization.hpp"
#include "abp/errors.hpp"

#include <json.hpp>

namespace abp {

using json = nlohmann::ordered_json;

namespace {

json ula_json(const UlaConfig &c) { return {{"num_elements", c.num_elements}, {"spacing_wavelengths", c.spacing_wavelengths}}; }

UlaConfig ula_from(const json &j) {
    UlaConfig c;
    c.num_elements = j.at("num_elements").get<std::size_t>();
    c.spacing_wavelengths = j.at("spacing_wavelengths").get<double>();
    c.validate();
    return c;
}

json pair_json(const AuxiliaryBeamPair &p) {
    return {{"boresight", p.boresight.value}, {"offset", p.offset}, {"low_beam", p.low_beam_id}, {"high_beam", p.high_beam_id}};
}

json selection_json(const PairSelection &s) {
    return {{"pair_index", s.pair_index},
            {"peak_beam", s.peak_beam},
            {"delta_power", s.powers.delta_power},
            {"sigma_power", s.powers.sigma_power},
            {"pair", pair_json(s.powers.pair)}};
}

json estimate_json(const AngleEstimate &e) {
    return {{"spatial_freq", e.spatial_freq.value}, {"angle", e.angle.value}, {"pair_id", e.pair_id}, {"ratio", e.ratio.value}};
}

json probings_json(const std::vector<ProbingMatrix> &v) {
    json out = json::array();
    for (const auto &p : v)
        out.push_back(p.beam_ids);
    return out;
}

template <class F> auto guarded(const char *what, F &&f) {
    try {
        return f();
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

} // namespace

std::string channel_to_json(const ChannelInstance &channel, std::uint64_t seed) {
    json j;
    j["seed"] = seed;
    j["tx"] = ula_json(channel.tx_cfg);
    j["rx"] = ula_json(channel.rx_cfg);
    j["paths"] = json::array();
    for (const auto &p : channel.paths)
        j["paths"].push_back({{"gain", {p.gain.real(), p.gain.imag()}}, {"aod", p.aod.value}, {"aoa", p.aoa.value}});
    return j.dump(2);
}

ChannelInstance channel_from_json(const std::string &text) {
    return guarded("channel_from_json", [&] {
        const json j = json::parse(text);
        std::vector<PathParams> paths;
        for (const auto &p : j.at("paths")) {
            const auto &g = p.at("gain");
            paths.push_back({cd{g.at(0).get<double>(), g.at(1).get<double>()}, PhysicalAngle{p.at("aod").get<double>()},
                             PhysicalAngle{p.at("aoa").get<double>()}});
        }
        return build_channel(paths, ula_from(j.at("tx")), ula_from(j.at("rx")));
    });
}

std::string grid_to_json(const BeamPairGrid &grid) {
    json j;
    j["array"] = ula_json(grid.cfg);
    j["coverage"] = {grid.coverage.lo, grid.coverage.hi};
    j["offset"] = grid.offset;
    j["beam_freqs"] = json::array();
    for (const auto &f : grid.beam_freqs)
        j["beam_freqs"].push_back(f.value);
    j["pairs"] = json::array();
    for (const auto &p : grid.pairs)
        j["pairs"].push_back(pair_json(p));
    return j.dump(2);
}

BeamPairGrid grid_from_json(const std::string &text) {
    return guarded("grid_from_json", [&] {
        const json j = json::parse(text);
        const auto &c = j.at("coverage");
        return build_pair_grid({c.at(0).get<double>(), c.at(1).get<double>()}, j.at("offset").get<double>(),
                               ula_from(j.at("array")));
    });
}

std::string schedule_to_json(const ProbingSchedule &schedule) {
    json j;
    j["seed"] = schedule.seed;
    j["mode"] = to_string(schedule.mode);
    j["tx_probings"] = probings_json(schedule.tx_probings);
    j["rx_probings"] = probings_json(schedule.rx_probings);
    return j.dump(2);
}

ProbingSchedule schedule_from_json(const std::string &text, const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx) {
    return guarded("schedule_from_json", [&] {
        const json j = json::parse(text);
        ProbingSchedule s;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.mode = parse_schedule_mode(j.at("mode").get<std::string>());
        for (const auto &ids : j.at("tx_probings"))
            s.tx_probings.push_back(make_probing_matrix(grid_tx, ids.get<std::vector<int>>()));
        for (const auto &ids : j.at("rx_probings"))
            s.rx_probings.push_back(make_probing_matrix(grid_rx, ids.get<std::vector<int>>()));
        return s;
    });
}

std::string codebook_to_json(const ScalarCodebook &codebook) {
    json j;
    j["bits"] = codebook.bits;
    j["domain"] = {codebook.domain.lo, codebook.domain.hi};
    j["codewords"] = codebook.codewords;
    return j.dump(2);
}

ScalarCodebook codebook_from_json(const std::string &text) {
    return guarded("codebook_from_json", [&] {
        const json j = json::parse(text);
        ScalarCodebook cb;
        cb.bits = j.at("bits").get<unsigned>();
        cb.domain = {j.at("domain").at(0).get<double>(), j.at("domain").at(1).get<double>()};
        cb.codewords = j.at("codewords").get<std::vector<double>>();
        cb.validate();
        return cb;
    });
}

std::string trace_to_json(const SinglePathEstimate &estimate) {
    json j;
    j["aod"] = estimate_json(estimate.aod);
    j["aoa"] = estimate_json(estimate.aoa);
    j["out_of_coverage"] = estimate.out_of_coverage;
    const auto &t = estimate.trace;
    json powers = json::array();
    for (Eigen::Index r = 0; r < t.powers.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < t.powers.cols(); ++c)
            row.push_back(t.powers(r, c));
        powers.push_back(row);
    }
    j["trace"] = {{"powers", powers},
                  {"rx_beam", t.rx_beam},
                  {"tx_beam", t.tx_beam},
                  {"tx_selection", selection_json(t.tx_selection)},
                  {"rx_selection", selection_json(t.rx_selection)}};
    return j.dump(2);
}

std::string trace_to_json(const MultipathEstimate &estimate) {
    json j;
    j["paths"] = json::array();
    for (const auto &[aod, aoa] : estimate.per_path)
        j["paths"].push_back({{"aod", estimate_json(aod)}, {"aoa", estimate_json(aoa)}});
    json tr;
    tr["rx_probing"] = estimate.trace.rx_probing;
    tr["tx_probing"] = estimate.trace.tx_probing;
    tr["paths"] = json::array();
    for (const auto &p : estimate.trace.paths)
        tr["paths"].push_back({{"row", p.row},
                               {"column", p.column},
                               {"tx_powers", p.tx_powers},
                               {"rx_powers", p.rx_powers},
                               {"tx_selection", selection_json(p.tx_selection)},
                               {"rx_selection", selection_json(p.rx_selection)}});
    j["trace"] = tr;
    return j.dump(2);
}

} // namespace abp
