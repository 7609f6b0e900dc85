#include "abp/errors.hpp"
#include "abp/sim_harness.hpp"

#include <json.hpp>
#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace abp {

using json = nlohmann::json;

namespace {

const std::pair<ExperimentKind, const char *> kind_names[] = {
    {ExperimentKind::single_path_mse, "single-path-mse"}, {ExperimentKind::variance, "variance"},
    {ExperimentKind::quantization, "quantization"},       {ExperimentKind::multipath_mse, "multipath-mse"},
    {ExperimentKind::maee, "maee"},                       {ExperimentKind::control_channel, "control-channel"},
    {ExperimentKind::rician, "rician"},
};

double snr_value(const json &v) {
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "noiseless")
            return std::numeric_limits<double>::infinity();
    }
    throw ConfigError("snr_db entries must be numbers or \"inf\"");
}

nlohmann::ordered_json snr_json(double v) {
    if (std::isinf(v) && v > 0)
        return "inf";
    return v;
}

template <class T> T positive_count(const json &v, const char *key) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(std::string(key) + " must be a non-negative integer");
    return v.get<T>();
}

std::pair<double, double> two_numbers(const json &v, const char *key) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(std::string(key) + " must be a two-element numeric array");
    return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<std::size_t> size_list(const json &v, const char *key) {
    if (!v.is_array())
        throw ConfigError(std::string(key) + " must be an array");
    std::vector<std::size_t> out;
    for (const auto &e : v)
        out.push_back(positive_count<std::size_t>(e, key));
    return out;
}

std::vector<double> number_list(const json &v, const char *key) {
    if (!v.is_array())
        throw ConfigError(std::string(key) + " must be an array");
    std::vector<double> out;
    for (const auto &e : v) {
        if (!e.is_number())
            throw ConfigError(std::string(key) + " entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

// [[n_t, n_r], ...] or [{"n_tx": .., "n_rx": ..}, ...]
template <class Out>
std::vector<Out> pair_list(const json &v, const char *key, const char *first, const char *second) {
    if (!v.is_array())
        throw ConfigError(std::string(key) + " must be an array");
    std::vector<Out> out;
    for (const auto &e : v) {
        std::size_t a = 0, b = 0;
        if (e.is_array() && e.size() == 2) {
            a = positive_count<std::size_t>(e[0], key);
            b = positive_count<std::size_t>(e[1], key);
        } else if (e.is_object() && e.size() == 2 && e.contains(first) && e.contains(second)) {
            a = positive_count<std::size_t>(e[first], key);
            b = positive_count<std::size_t>(e[second], key);
        } else {
            throw ConfigError(std::string(key) + " entries must be [a, b] or {\"" + first + "\", \"" + second + "\"}");
        }
        out.push_back({a, b});
    }
    return out;
}

std::string string_value(const json &v, const char *key) {
    if (!v.is_string())
        throw ConfigError(std::string(key) + " must be a string");
    return v.get<std::string>();
}

void apply_descriptor(ExperimentConfig &cfg, const json &j) {
    if (!j.is_object())
        throw ConfigError("experiment descriptor must be an object");
    for (const auto &[key, v] : j.items()) {
        const char *k = key.c_str();
        if (key == "experiment") {
            if (parse_experiment_kind(string_value(v, k)) != cfg.kind)
                throw ConfigError("descriptor is for '" + v.get<std::string>() + "', not '" + to_string(cfg.kind) + "'");
        } else if (key == "arrays") {
            cfg.arrays = pair_list<ArraySize>(v, k, "n_tx", "n_rx");
        } else if (key == "spacing") {
            cfg.spacing = v.get<double>();
        } else if (key == "offset_rule") {
            cfg.offset_rule = parse_offset_rule(string_value(v, k));
        } else if (key == "delta_tx") {
            cfg.delta_tx = v.get<double>();
        } else if (key == "delta_rx") {
            cfg.delta_rx = v.get<double>();
        } else if (key == "delta_tx_deg") {
            cfg.delta_tx = deg2rad(v.get<double>());
        } else if (key == "delta_rx_deg") {
            cfg.delta_rx = deg2rad(v.get<double>());
        } else if (key == "coverage") {
            const auto [lo, hi] = two_numbers(v, k);
            cfg.coverage = {lo, hi};
        } else if (key == "snr_db") {
            if (!v.is_array())
                throw ConfigError("snr_db must be an array");
            cfg.snr_db.clear();
            for (const auto &e : v)
                cfg.snr_db.push_back(snr_value(e));
        } else if (key == "trials") {
            cfg.trials = positive_count<std::size_t>(v, k);
        } else if (key == "seed") {
            cfg.seed = positive_count<std::uint64_t>(v, k);
        } else if (key == "threads") {
            cfg.threads = positive_count<std::size_t>(v, k);
        } else if (key == "gain_law") {
            cfg.gain_law = parse_gain_law(string_value(v, k));
        } else if (key == "angle_range_deg") {
            const auto [lo, hi] = two_numbers(v, k);
            cfg.angle_range = {deg2rad(lo), deg2rad(hi)};
        } else if (key == "feedback") {
            cfg.feedback = parse_feedback_mode(string_value(v, k));
        } else if (key == "bits") {
            cfg.bits = positive_count<unsigned>(v, k);
        } else if (key == "bits_list") {
            cfg.bits_list.clear();
            for (auto b : size_list(v, k))
                cfg.bits_list.push_back(static_cast<unsigned>(b));
        } else if (key == "codebook_samples") {
            cfg.codebook_samples = positive_count<std::size_t>(v, k);
        } else if (key == "num_paths") {
            cfg.num_paths = size_list(v, k);
        } else if (key == "psi") {
            cfg.psi = v.get<double>();
        } else if (key == "theta_deg") {
            cfg.theta = deg2rad(v.get<double>());
        } else if (key == "interferer_range_deg") {
            const auto [lo, hi] = two_numbers(v, k);
            cfg.interferer_range = {deg2rad(lo), deg2rad(hi)};
        } else if (key == "budgets") {
            cfg.budgets = pair_list<ProbingBudget>(v, k, "n_t", "m_t");
        } else if (key == "n_rf") {
            cfg.n_rf = positive_count<std::size_t>(v, k);
        } else if (key == "m_rf") {
            cfg.m_rf = positive_count<std::size_t>(v, k);
        } else if (key == "paths") {
            cfg.paths = positive_count<std::size_t>(v, k);
        } else if (key == "schedule_mode") {
            cfg.schedule_mode = parse_schedule_mode(string_value(v, k));
        } else if (key == "row_mode") {
            cfg.row_mode = parse_row_mode(string_value(v, k));
        } else if (key == "k_factor_db") {
            cfg.k_factor_db = number_list(v, k);
        } else if (key == "num_nlos") {
            cfg.num_nlos = positive_count<std::size_t>(v, k);
        } else if (key == "tradeoff_sizes") {
            cfg.tradeoff_sizes = size_list(v, k);
        } else if (key == "sector_deg") {
            cfg.sector_deg = v.get<double>();
        } else if (key == "beam_widths_deg") {
            cfg.beam_widths_deg = number_list(v, k);
        } else if (key == "output") {
            cfg.output = string_value(v, k);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
}

} // namespace

ExperimentKind parse_experiment_kind(const std::string &name) {
    for (const auto &[k, n] : kind_names)
        if (name == n)
            return k;
    throw ConfigError("unknown experiment '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
    for (const auto &[k, n] : kind_names)
        if (k == kind)
            return n;
    return "unknown";
}

OffsetRule parse_offset_rule(const std::string &name) {
    if (name == "standard")
        return OffsetRule::standard;
    if (name == "exact")
        return OffsetRule::exact;
    if (name == "fixed")
        return OffsetRule::fixed;
    throw ConfigError("unknown offset rule '" + name + "'");
}

std::string to_string(OffsetRule rule) {
    switch (rule) {
    case OffsetRule::standard:
        return "standard";
    case OffsetRule::exact:
        return "exact";
    case OffsetRule::fixed:
        return "fixed";
    }
    return "unknown";
}

double ExperimentConfig::offset_tx(std::size_t n) const {
    switch (offset_rule) {
    case OffsetRule::standard:
        return default_offset(n);
    case OffsetRule::exact:
        return exact_offset(n);
    case OffsetRule::fixed:
        break;
    }
    return delta_tx;
}

double ExperimentConfig::offset_rx(std::size_t m) const {
    switch (offset_rule) {
    case OffsetRule::standard:
        return default_offset(m);
    case OffsetRule::exact:
        return exact_offset(m);
    case OffsetRule::fixed:
        break;
    }
    return delta_rx;
}

void ExperimentConfig::validate() const {
    if (trials < 1)
        throw ConfigError("trials must be at least 1");
    if (snr_db.empty())
        throw ConfigError("snr_db must not be empty");
    for (double s : snr_db)
        if (std::isnan(s) || s == -std::numeric_limits<double>::infinity())
            throw ConfigError("snr_db entries must be finite or +inf");
    if (arrays.empty())
        throw ConfigError("arrays must not be empty");
    for (const auto &a : arrays)
        if (a.n_tx < 1 || a.n_rx < 1)
            throw ConfigError("array sizes must be positive");
    if (!(spacing > 0.0 && spacing <= 1.0))
        throw ConfigError("spacing must lie in (0, 1]");
    if (offset_rule == OffsetRule::fixed && !(delta_tx > 0.0 && delta_tx < pi && delta_rx > 0.0 && delta_rx < pi))
        throw ConfigError("fixed offsets must lie in (0, pi)");
    if (!(coverage.hi > coverage.lo))
        throw ConfigError("coverage must be a nonempty interval");
    if (!(angle_range.lo < angle_range.hi) || angle_range.lo < -pi / 2 - 1e-12 || angle_range.hi > pi / 2 + 1e-12)
        throw ConfigError("angle range must be an increasing interval within [-90, 90] degrees");
    if (bits > 16)
        throw ConfigError("bits must be at most 16");
    for (unsigned b : bits_list)
        if (b > 16)
            throw ConfigError("bits_list entries must be at most 16");

    switch (kind) {
    case ExperimentKind::variance:
        if (num_paths.empty())
            throw ConfigError("num_paths must not be empty");
        for (auto p : num_paths)
            if (p < 1)
                throw ConfigError("num_paths entries must be positive");
        if (!(interferer_range.lo < interferer_range.hi))
            throw ConfigError("interferer range must be increasing");
        break;
    case ExperimentKind::multipath_mse:
        if (budgets.empty())
            throw ConfigError("budgets must not be empty");
        if (paths < 1 || paths > 8)
            throw ConfigError("paths must lie in [1, 8]");
        if (paths > std::min(n_rf, m_rf))
            throw ConfigError("paths must not exceed the number of RF chains");
        break;
    case ExperimentKind::control_channel: {
        if (beam_widths_deg.empty())
            throw ConfigError("beam_widths_deg must not be empty");
        double prev = sector_deg;
        for (double w : beam_widths_deg) {
            if (!(w > 0.0))
                throw ConfigError("beam widths must be positive");
            if (w > prev + 1e-12)
                throw ConfigError("layer beam width exceeds the previous confidence range");
            prev = w;
        }
        if (!(sector_deg > 0.0 && sector_deg <= 360.0))
            throw ConfigError("sector_deg must lie in (0, 360]");
        break;
    }
    case ExperimentKind::rician:
        if (k_factor_db.empty())
            throw ConfigError("k_factor_db must not be empty");
        if (num_nlos < 1)
            throw ConfigError("num_nlos must be positive");
        break;
    case ExperimentKind::quantization:
        if (bits_list.empty())
            throw ConfigError("bits_list must not be empty");
        break;
    default:
        break;
    }
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
    case ExperimentKind::single_path_mse:
        c.arrays = {{8, 8}, {16, 16}, {32, 32}};
        break;
    case ExperimentKind::variance:
        c.arrays = {{8, 4}};
        c.offset_rule = OffsetRule::fixed;
        c.delta_tx = pi / 16;
        c.delta_rx = pi / 8;
        c.snr_db = {0, 5, 10, 15, 20};
        break;
    case ExperimentKind::quantization:
        c.arrays = {{16, 8}};
        c.snr_db = {-10};
        break;
    case ExperimentKind::multipath_mse:
        c.arrays = {{8, 8}};
        c.offset_rule = OffsetRule::exact;
        c.budgets = {{12, 8}, {14, 14}, {20, 20}};
        c.trials = 500;
        break;
    case ExperimentKind::maee:
        c.arrays = {{8, 8}, {16, 8}, {32, 8}, {64, 8}, {128, 8}};
        c.snr_db = {-10, 0};
        break;
    case ExperimentKind::control_channel:
        c.arrays = {{128, 1}};
        c.snr_db = {std::numeric_limits<double>::infinity(), 10, 0};
        c.trials = 1000;
        break;
    case ExperimentKind::rician:
        c.arrays = {{16, 16}};
        c.snr_db = {10};
        break;
    }
    return c;
}

ExperimentConfig config_from_json(const std::string &text, ExperimentKind kind) {
    ExperimentConfig cfg = default_config(kind);
    try {
        apply_descriptor(cfg, json::parse(text));
    } catch (const json::exception &e) {
        throw ConfigError(std::string("invalid experiment descriptor: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig config_from_toml(const std::string &text, ExperimentKind kind) {
    toml::table tbl;
    try {
        tbl = toml::parse(text);
    } catch (const toml::parse_error &e) {
        throw ConfigError(std::string("invalid TOML descriptor: ") + std::string(e.description()));
    }
    std::ostringstream os;
    os << toml::json_formatter{tbl};
    return config_from_json(os.str(), kind);
}

ExperimentConfig load_config(const std::string &path, ExperimentKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const bool is_toml = path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
    return is_toml ? config_from_toml(ss.str(), kind) : config_from_json(ss.str(), kind);
}

std::string config_to_json(const ExperimentConfig &cfg) {
    nlohmann::ordered_json j;
    j["experiment"] = to_string(cfg.kind);
    j["arrays"] = json::array();
    for (const auto &a : cfg.arrays)
        j["arrays"].push_back({a.n_tx, a.n_rx});
    j["spacing"] = cfg.spacing;
    j["offset_rule"] = to_string(cfg.offset_rule);
    if (cfg.offset_rule == OffsetRule::fixed) {
        j["delta_tx"] = cfg.delta_tx;
        j["delta_rx"] = cfg.delta_rx;
    }
    j["coverage"] = {cfg.coverage.lo, cfg.coverage.hi};
    j["snr_db"] = json::array();
    for (double s : cfg.snr_db)
        j["snr_db"].push_back(snr_json(s));
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["gain_law"] = to_string(cfg.gain_law);
    j["angle_range_deg"] = {rad2deg(cfg.angle_range.lo), rad2deg(cfg.angle_range.hi)};
    j["feedback"] = to_string(cfg.feedback);
    j["bits"] = cfg.bits;
    j["bits_list"] = cfg.bits_list;
    j["codebook_samples"] = cfg.codebook_samples;
    j["num_paths"] = cfg.num_paths;
    j["psi"] = cfg.psi;
    j["theta_deg"] = rad2deg(cfg.theta);
    j["interferer_range_deg"] = {rad2deg(cfg.interferer_range.lo), rad2deg(cfg.interferer_range.hi)};
    j["budgets"] = json::array();
    for (const auto &b : cfg.budgets)
        j["budgets"].push_back({b.n_t, b.m_t});
    j["n_rf"] = cfg.n_rf;
    j["m_rf"] = cfg.m_rf;
    j["paths"] = cfg.paths;
    j["schedule_mode"] = to_string(cfg.schedule_mode);
    j["row_mode"] = to_string(cfg.row_mode);
    j["k_factor_db"] = cfg.k_factor_db;
    j["num_nlos"] = cfg.num_nlos;
    j["tradeoff_sizes"] = cfg.tradeoff_sizes;
    j["sector_deg"] = cfg.sector_deg;
    j["beam_widths_deg"] = cfg.beam_widths_deg;
    if (!cfg.output.empty())
        j["output"] = cfg.output;
    return j.dump(2);
}

} // namespace abp
