#include "abp/sim_harness.hpp"
#include "abp/errors.hpp"
#include "abp/performance_analysis.hpp"
#include "abp/quantizer.hpp"
#include "abp/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>

namespace abp {

namespace {

// Independent random streams hanging off the master seed
enum Stream : std::uint64_t {
    stream_channel = 1,
    stream_noise = 2,
    stream_schedule = 3,
    stream_interferer = 4,
    stream_codebook = 5,
    stream_nlos = 6,
    stream_phase = 7,
    stream_ue = 8,
};

using Point = std::vector<std::pair<std::string, std::string>>;

std::string fmt_int(std::size_t v) { return std::to_string(v); }

double mean(const std::vector<double> &v) {
    if (v.empty())
        return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double> &v) {
    if (v.size() < 2)
        return 0.0;
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v)
        acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

double quantile(std::vector<double> v, double q) {
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(v.size() - 1, lo + 1);
    const double t = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - t) + v[hi] * t;
}

struct Grids {
    BeamPairGrid tx;
    BeamPairGrid rx;
};

Grids make_grids(const ExperimentConfig &cfg, const ArraySize &a) {
    return {build_pair_grid(cfg.coverage, cfg.offset_tx(a.n_tx), make_ula(a.n_tx, cfg.spacing)),
            build_pair_grid(cfg.coverage, cfg.offset_rx(a.n_rx), make_ula(a.n_rx, cfg.spacing))};
}

Point array_point(const ArraySize &a) { return {{"n_tx", fmt_int(a.n_tx)}, {"n_rx", fmt_int(a.n_rx)}}; }

FeedbackConfig make_feedback(const ExperimentConfig &cfg, const BeamPairGrid &tx, std::uint64_t key) {
    FeedbackConfig fb;
    if (cfg.bits == 0 || cfg.feedback == FeedbackMode::none)
        return fb;
    fb.mode = cfg.feedback;
    if (cfg.feedback == FeedbackMode::ratio) {
        const auto samples = ratio_training_samples(tx, cfg.codebook_samples, key, cfg.angle_range);
        fb.codebook = std::make_shared<ScalarCodebook>(train_ratio_codebook(samples, cfg.bits));
    } else {
        fb.codebook = std::make_shared<ScalarCodebook>(uniform_codebook({tx.coverage.lo, tx.coverage.hi}, cfg.bits));
    }
    return fb;
}

// Per (array, snr) accumulators of a single-path sweep experiment
enum SweepMetric : std::size_t {
    m_sq_aod,
    m_sq_aoa,
    m_sq_mu,  // wrapped spatial-frequency error; insensitive to endfire aliasing
    m_sq_psi,
    m_abs_aod_deg,
    m_abs_aoa_deg,
    m_se_est,
    m_se_perfect,
    m_gain_est,
    m_gain_perfect,
    m_out_of_coverage,
    m_count
};

struct SweepResult {
    // [array][snr][metric] sums over trials
    std::vector<std::vector<std::array<double, m_count>>> sums;
};

SweepResult single_path_sweep(const ExperimentConfig &cfg, const std::vector<ArraySize> &arrays) {
    const std::size_t na = arrays.size(), ns = cfg.snr_db.size(), nt = cfg.trials;
    std::vector<Grids> grids;
    std::vector<FeedbackConfig> fbs;
    for (std::size_t a = 0; a < na; ++a) {
        grids.push_back(make_grids(cfg, arrays[a]));
        fbs.push_back(make_feedback(cfg, grids.back().tx, derive_seed(cfg.seed, {stream_codebook, a})));
    }
    std::vector<NoiseModel> noises;
    for (double s : cfg.snr_db)
        noises.push_back(NoiseModel::from_db(s));

    std::vector<double> per_trial(nt * na * ns * m_count, 0.0);
    parallel_for(nt, cfg.threads, [&](std::size_t t) {
        const auto paths = sample_paths(derive_seed(cfg.seed, {stream_channel, t}), 1, cfg.angle_range, cfg.gain_law);
        const std::uint64_t noise_key = derive_seed(cfg.seed, {stream_noise, t});
        for (std::size_t a = 0; a < na; ++a) {
            const auto &g = grids[a];
            const ChannelInstance ch = build_channel(paths, g.tx.cfg, g.rx.cfg);
            const Eigen::MatrixXcd response = g.rx.beams.adjoint() * (ch.matrix * g.tx.beams);
            const bool ooc = outside_coverage(ch, g.tx, g.rx);
            const double gain_perfect =
                effective_gain(ch, steering_vector(angle_to_spatial_freq(paths[0].aod, g.tx.cfg), g.tx.cfg),
                               steering_vector(angle_to_spatial_freq(paths[0].aoa, g.rx.cfg), g.rx.cfg));
            for (std::size_t s = 0; s < ns; ++s) {
                const Eigen::MatrixXcd y = add_tdm_noise(response, g.rx.beams, noises[s], noise_key);
                const SinglePathEstimate est = estimate_from_sweep(y, g.tx, g.rx, fbs[a]);
                const double e_aod = est.aod.angle.value - paths[0].aod.value;
                const double e_aoa = est.aoa.angle.value - paths[0].aoa.value;
                const double gain_est = effective_gain(ch, steering_vector(est.aod.spatial_freq, g.tx.cfg),
                                                       steering_vector(est.aoa.spatial_freq, g.rx.cfg));
                double *m = &per_trial[((t * na + a) * ns + s) * m_count];
                m[m_sq_aod] = e_aod * e_aod;
                m[m_sq_aoa] = e_aoa * e_aoa;
                const double e_mu =
                    wrap_phase(est.aod.spatial_freq.value - angle_to_spatial_freq(paths[0].aod, g.tx.cfg).value);
                const double e_psi =
                    wrap_phase(est.aoa.spatial_freq.value - angle_to_spatial_freq(paths[0].aoa, g.rx.cfg).value);
                m[m_sq_mu] = e_mu * e_mu;
                m[m_sq_psi] = e_psi * e_psi;
                m[m_abs_aod_deg] = std::abs(rad2deg(e_aod));
                m[m_abs_aoa_deg] = std::abs(rad2deg(e_aoa));
                m[m_se_est] = std::log2(1.0 + noises[s].snr_linear * gain_est);
                m[m_se_perfect] = std::log2(1.0 + noises[s].snr_linear * gain_perfect);
                m[m_gain_est] = gain_est;
                m[m_gain_perfect] = gain_perfect;
                m[m_out_of_coverage] = ooc ? 1.0 : 0.0;
            }
        }
    });

    SweepResult r;
    r.sums.assign(na, std::vector<std::array<double, m_count>>(ns));
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t s = 0; s < ns; ++s)
            r.sums[a][s].fill(0.0);
    for (std::size_t t = 0; t < nt; ++t) // fixed order keeps sums bit-identical across thread counts
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t s = 0; s < ns; ++s)
                for (std::size_t k = 0; k < m_count; ++k)
                    r.sums[a][s][k] += per_trial[((t * na + a) * ns + s) * m_count + k];
    return r;
}

void check_kind(const ExperimentConfig &cfg, ExperimentKind kind) {
    if (cfg.kind != kind)
        throw ConfigError("experiment config kind '" + to_string(cfg.kind) + "' passed to runner for '" +
                          to_string(kind) + "'");
    cfg.validate();
}

} // namespace

// ---------------------------------------------------------------------------
// reports

std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v); // shortest round-trip, locale independent
    return std::string(buf, res.ptr);
}

std::string MetricRow::point_string() const {
    std::string s;
    for (std::size_t i = 0; i < point.size(); ++i) {
        if (i)
            s += ';';
        s += point[i].first + "=" + point[i].second;
    }
    return s;
}

void MetricReport::add(std::vector<std::pair<std::string, std::string>> point, std::string metric, double value,
                       std::size_t trials, std::uint64_t seed) {
    rows.push_back({std::move(point), std::move(metric), value, trials, seed});
}

const MetricRow &MetricReport::find(const std::string &metric, const std::map<std::string, std::string> &where) const {
    for (const auto &r : rows) {
        if (r.metric != metric)
            continue;
        bool ok = true;
        for (const auto &[k, v] : where) {
            const auto it = std::find_if(r.point.begin(), r.point.end(), [&](const auto &kv) { return kv.first == k; });
            if (it == r.point.end() || it->second != v) {
                ok = false;
                break;
            }
        }
        if (ok)
            return r;
    }
    std::string desc = metric;
    for (const auto &[k, v] : where)
        desc += " " + k + "=" + v;
    throw ContractError("MetricReport: no row for " + desc);
}

double MetricReport::value(const std::string &metric, const std::map<std::string, std::string> &where) const {
    return find(metric, where).value;
}

std::string MetricReport::to_csv() const {
    std::string out = "experiment,point,metric,value,trials,seed\n";
    for (const auto &r : rows) {
        out += experiment + "," + r.point_string() + "," + r.metric + "," + format_number(r.value) + "," +
               std::to_string(r.trials) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto &r : rows) {
        nlohmann::ordered_json row;
        nlohmann::ordered_json pt = nlohmann::ordered_json::object();
        for (const auto &[k, v] : r.point)
            pt[k] = v;
        row["point"] = pt;
        row["metric"] = r.metric;
        if (std::isfinite(r.value))
            row["value"] = r.value;
        else
            row["value"] = format_number(r.value);
        row["trials"] = r.trials;
        row["seed"] = r.seed;
        j["rows"].push_back(row);
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// helpers

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)> &fn) {
    std::size_t workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto &th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

std::vector<double> ratio_training_samples(const BeamPairGrid &grid_tx, std::size_t count, std::uint64_t seed,
                                           AngleRange angle_range) {
    CounterRng rng(seed);
    std::vector<double> out;
    out.reserve(count);
    std::vector<double> powers(grid_tx.num_beams());
    for (std::size_t i = 0; i < count; ++i) {
        const PhysicalAngle theta{rng.uniform(angle_range.lo, angle_range.hi)};
        const SpatialFrequency mu = angle_to_spatial_freq(theta, grid_tx.cfg);
        for (std::size_t b = 0; b < powers.size(); ++b)
            powers[b] = beam_gain(grid_tx.beam_freqs[b], mu, grid_tx.cfg);
        out.push_back(ratio_from_powers(select_pair(powers, grid_tx).powers).value);
    }
    return out;
}

double gob_quantization_floor(const BeamPairGrid &grid, AngleRange angle_range, std::size_t nodes) {
    if (nodes < 1)
        throw ContractError("gob_quantization_floor: need at least one node");
    const double n = static_cast<double>(grid.cfg.num_elements);
    const double h = (angle_range.hi - angle_range.lo) / static_cast<double>(nodes);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double theta = angle_range.lo + (static_cast<double>(i) + 0.5) * h;
        const double mu = grid.cfg.max_spatial_freq() * std::sin(theta);
        double best = std::numeric_limits<double>::infinity();
        for (const auto &f : grid.beam_freqs)
            best = std::min(best, std::abs(wrap_phase(mu - f.value)));
        // ||a(x) - a(y)||^2 = 2 - (2/N) sum_k cos(k d)
        double c = 0.0;
        for (std::size_t k = 0; k < grid.cfg.num_elements; ++k)
            c += std::cos(static_cast<double>(k) * best);
        acc += 2.0 - 2.0 * c / n;
    }
    return acc / static_cast<double>(nodes);
}

double matched_matrix_error(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &a_hat) {
    if (a.rows() != a_hat.rows() || a.cols() != a_hat.cols())
        throw ContractError("matched_matrix_error: shape mismatch");
    const auto p = static_cast<std::size_t>(a.cols());
    if (p > 8)
        throw ContractError("matched_matrix_error: at most 8 columns supported");
    // pairwise column errors, then brute force over permutations
    Eigen::MatrixXd cost(a.cols(), a.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            cost(i, j) = (a.col(i) - a_hat.col(j)).squaredNorm();
    std::vector<Eigen::Index> perm(p);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            s += cost(static_cast<Eigen::Index>(i), perm[i]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// ---------------------------------------------------------------------------
// experiments

MetricReport run_single_path_mse(const ExperimentConfig &cfg) {
    check_kind(cfg, ExperimentKind::single_path_mse);
    const SweepResult r = single_path_sweep(cfg, cfg.arrays);
    MetricReport rep;
    rep.experiment = to_string(cfg.kind);
    const double t = static_cast<double>(cfg.trials);
    for (std::size_t a = 0; a < cfg.arrays.size(); ++a) {
        for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
            Point pt = array_point(cfg.arrays[a]);
            pt.emplace_back("snr_db", format_number(cfg.snr_db[s]));
            pt.emplace_back("feedback", cfg.bits ? to_string(cfg.feedback) : "none");
            pt.emplace_back("bits", std::to_string(cfg.bits));
            const auto &m = r.sums[a][s];
            rep.add(pt, "mse_aod", m[m_sq_aod] / t, cfg.trials, cfg.seed);
            rep.add(pt, "mse_aoa", m[m_sq_aoa] / t, cfg.trials, cfg.seed);
            rep.add(pt, "mse_freq_aod", m[m_sq_mu] / t, cfg.trials, cfg.seed);
            rep.add(pt, "mse_freq_aoa", m[m_sq_psi] / t, cfg.trials, cfg.seed);
            rep.add(pt, "maee_aod_deg", m[m_abs_aod_deg] / t, cfg.trials, cfg.seed);
            rep.add(pt, "maee_aoa_deg", m[m_abs_aoa_deg] / t, cfg.trials, cfg.seed);
            if (std::isfinite(cfg.snr_db[s])) {
                rep.add(pt, "se_estimated", m[m_se_est] / t, cfg.trials, cfg.seed);
                rep.add(pt, "se_perfect", m[m_se_perfect] / t, cfg.trials, cfg.seed);
            }
            rep.add(pt, "gain_estimated", m[m_gain_est] / t, cfg.trials, cfg.seed);
            rep.add(pt, "gain_perfect", m[m_gain_perfect] / t, cfg.trials, cfg.seed);
            rep.add(pt, "out_of_coverage_rate", m[m_out_of_coverage] / t, cfg.trials, cfg.seed);
        }
    }
    return rep;
}

MetricReport run_maee_tradeoff(const ExperimentConfig &cfg) {
    check_kind(cfg, ExperimentKind::maee);
    MetricReport rep;
    rep.experiment = to_string(cfg.kind);
    const double t = static_cast<double>(cfg.trials);
    const SweepResult r = single_path_sweep(cfg, cfg.arrays);
    for (std::size_t a = 0; a < cfg.arrays.size(); ++a) {
        for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
            Point pt = array_point(cfg.arrays[a]);
            pt.emplace_back("snr_db", format_number(cfg.snr_db[s]));
            rep.add(pt, "maee_aod_deg", r.sums[a][s][m_abs_aod_deg] / t, cfg.trials, cfg.seed);
            rep.add(pt, "maee_aoa_deg", r.sums[a][s][m_abs_aoa_deg] / t, cfg.trials, cfg.seed);
        }
    }

    // trade-off table: resolution vs sweep length, at the first SNR point
    if (!cfg.tradeoff_sizes.empty()) {
        std::vector<ArraySize> sq;
        for (auto n : cfg.tradeoff_sizes)
            sq.push_back({n, n});
        ExperimentConfig one = cfg;
        one.snr_db = {cfg.snr_db.front()};
        const SweepResult tr = single_path_sweep(one, sq);
        for (std::size_t i = 0; i < sq.size(); ++i) {
            const Grids g = make_grids(cfg, sq[i]);
            const double delta_deg = rad2deg(g.tx.offset);
            const double per_side = 180.0 / (2.0 * delta_deg);
            Point pt{{"n_ant", fmt_int(sq[i].n_tx)},
                     {"delta_deg", format_number(delta_deg)},
                     {"snr_db", format_number(cfg.snr_db.front())}};
            rep.add(pt, "iterations_rule", per_side * per_side, cfg.trials, cfg.seed);
            rep.add(pt, "iterations_simulated", static_cast<double>(g.tx.num_beams() * g.rx.num_beams()), cfg.trials,
                    cfg.seed);
            rep.add(pt, "maee_aod_deg", tr.sums[i][0][m_abs_aod_deg] / t, cfg.trials, cfg.seed);
            rep.add(pt, "maee_aoa_deg", tr.sums[i][0][m_abs_aoa_deg] / t, cfg.trials, cfg.seed);
        }
    }
    return rep;
}

MetricReport run_quantization_study(const ExperimentConfig &cfg) {
    check_kind(cfg, ExperimentKind::quantization);
    MetricReport rep;
    rep.experiment = to_string(cfg.kind);
    const ArraySize arr = cfg.arrays.front();

    // Codebook training set: noiseless ratios with a single-antenna receiver
    const BeamPairGrid tx = build_pair_grid(cfg.coverage, cfg.offset_tx(arr.n_tx), make_ula(arr.n_tx, cfg.spacing));
    const std::vector<double> ratios =
        ratio_training_samples(tx, cfg.codebook_samples, derive_seed(cfg.seed, {stream_codebook, 0}), cfg.angle_range);
    // matching spatial-frequency estimates (what frequency feedback would quantize)
    std::vector<double> freqs;
    {
        CounterRng rng(derive_seed(cfg.seed, {stream_codebook, 0}));
        std::vector<double> powers(tx.num_beams());
        freqs.reserve(ratios.size());
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            const SpatialFrequency mu = angle_to_spatial_freq({rng.uniform(cfg.angle_range.lo, cfg.angle_range.hi)}, tx.cfg);
            for (std::size_t b = 0; b < powers.size(); ++b)
                powers[b] = beam_gain(tx.beam_freqs[b], mu, tx.cfg);
            const PairSelection sel = select_pair(powers, tx);
            freqs.push_back(invert_ratio(ratio_from_powers(sel.powers), sel.powers.pair).value);
        }
    }

    std::vector<FeedbackConfig> ratio_fb, freq_fb;
    for (unsigned b : cfg.bits_list) {
        Point pt{{"n_tx", fmt_int(arr.n_tx)}, {"bits", std::to_string(b)}};
        FeedbackConfig rf, ff;
        if (b > 0) {
            TrainingReport tr;
            auto rcb = std::make_shared<ScalarCodebook>(train_ratio_codebook(ratios, b, &tr));
            auto fcb = std::make_shared<ScalarCodebook>(uniform_codebook({tx.coverage.lo, tx.coverage.hi}, b));
            rep.add(pt, "quant_mse_ratio", quantization_mse(ratios, *rcb), ratios.size(), cfg.seed);
            rep.add(pt, "quant_mse_frequency", quantization_mse(freqs, *fcb), freqs.size(), cfg.seed);
            // ratio quantization error carried into the frequency domain
            double acc = 0.0;
            CounterRng rng(derive_seed(cfg.seed, {stream_codebook, 0}));
            std::vector<double> powers(tx.num_beams());
            for (std::size_t i = 0; i < ratios.size(); ++i) {
                const SpatialFrequency mu =
                    angle_to_spatial_freq({rng.uniform(cfg.angle_range.lo, cfg.angle_range.hi)}, tx.cfg);
                for (std::size_t k = 0; k < powers.size(); ++k)
                    powers[k] = beam_gain(tx.beam_freqs[k], mu, tx.cfg);
                const auto &pair = select_pair(powers, tx).powers.pair;
                const double e = invert_ratio({quantize(ratios[i], *rcb).codeword}, pair).value - freqs[i];
                acc += e * e;
            }
            rep.add(pt, "quant_mse_ratio_in_frequency", acc / static_cast<double>(ratios.size()), ratios.size(),
                    cfg.seed);
            rep.add(pt, "lloyd_iterations", static_cast<double>(tr.iterations), ratios.size(), cfg.seed);
            rf = {FeedbackMode::ratio, rcb};
            ff = {FeedbackMode::spatial_frequency, fcb};
        }
        ratio_fb.push_back(rf);
        freq_fb.push_back(ff);
    }

    // Angle estimation with each feedback path over a noisy sweep
    const Grids g = make_grids(cfg, arr);
    const std::size_t nb = cfg.bits_list.size(), ns = cfg.snr_db.size(), nt = cfg.trials;
    std::vector<NoiseModel> noises;
    for (double s : cfg.snr_db)
        noises.push_back(NoiseModel::from_db(s));
    // per trial: [snr][unquantized, ratio b..., frequency b...]
    const std::size_t stride = 1 + 2 * nb;
    std::vector<double> sq(nt * ns * stride, 0.0);
    parallel_for(nt, cfg.threads, [&](std::size_t t) {
        const auto paths = sample_paths(derive_seed(cfg.seed, {stream_channel, t}), 1, cfg.angle_range, cfg.gain_law);
        const ChannelInstance ch = build_channel(paths, g.tx.cfg, g.rx.cfg);
        const Eigen::MatrixXcd response = g.rx.beams.adjoint() * (ch.matrix * g.tx.beams);
        const std::uint64_t noise_key = derive_seed(cfg.seed, {stream_noise, t});
        for (std::size_t s = 0; s < ns; ++s) {
            const Eigen::MatrixXcd y = add_tdm_noise(response, g.rx.beams, noises[s], noise_key);
            const SinglePathEstimate est = estimate_from_sweep(y, g.tx, g.rx);
            double *o = &sq[(t * ns + s) * stride];
            const double e0 = est.aod.angle.value - paths[0].aod.value;
            o[0] = e0 * e0;
            for (std::size_t b = 0; b < nb; ++b) {
                const double er = estimate_angle(est.trace.tx_selection, g.tx.cfg, ratio_fb[b]).angle.value -
                                  paths[0].aod.value;
                const double ef = estimate_angle(est.trace.tx_selection, g.tx.cfg, freq_fb[b]).angle.value -
                                  paths[0].aod.value;
                o[1 + b] = er * er;
                o[1 + nb + b] = ef * ef;
            }
        }
    });
    for (std::size_t s = 0; s < ns; ++s) {
        std::vector<double> acc(stride, 0.0);
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t k = 0; k < stride; ++k)
                acc[k] += sq[(t * ns + s) * stride + k];
        const double tt = static_cast<double>(nt);
        Point base = array_point(arr);
        base.emplace_back("snr_db", format_number(cfg.snr_db[s]));
        {
            Point pt = base;
            pt.emplace_back("feedback", "none");
            pt.emplace_back("bits", "0");
            rep.add(pt, "mse_aod", acc[0] / tt, nt, cfg.seed);
        }
        for (std::size_t b = 0; b < nb; ++b) {
            Point pr = base, pf = base;
            pr.emplace_back("feedback", "ratio");
            pr.emplace_back("bits", std::to_string(cfg.bits_list[b]));
            pf.emplace_back("feedback", "spatial_frequency");
            pf.emplace_back("bits", std::to_string(cfg.bits_list[b]));
            rep.add(pr, "mse_aod", acc[1 + b] / tt, nt, cfg.seed);
            rep.add(pf, "mse_aod", acc[1 + nb + b] / tt, nt, cfg.seed);
        }
    }
    return rep;
}

MetricReport run_variance_validation(const ExperimentConfig &cfg) {
    check_kind(cfg, ExperimentKind::variance);
    MetricReport rep;
    rep.experiment = to_string(cfg.kind);
    const ArraySize arr = cfg.arrays.front();
    const UlaConfig tx_cfg = make_ula(arr.n_tx, cfg.spacing);
    const UlaConfig rx_cfg = make_ula(arr.n_rx, cfg.spacing);
    const double delta_r = cfg.offset_rx(arr.n_rx);
    // one receive pair at zero boresight
    const AuxiliaryBeamPair pair{{0.0}, delta_r, 0, 1};
    Eigen::MatrixXcd w(static_cast<Eigen::Index>(arr.n_rx), 2);
    w.col(0) = steering_vector(pair.low_freq(), rx_cfg);
    w.col(1) = steering_vector(pair.high_freq(), rx_cfg);

    const PhysicalAngle theta{cfg.theta};
    const PhysicalAngle phi = spatial_freq_to_angle({cfg.psi}, rx_cfg);
    const SpatialFrequency mu = angle_to_spatial_freq(theta, tx_cfg);
    const SteeringVector f = steering_vector(mu, tx_cfg); // transmit beam aligned with the AoD

    // interferer angles are fixed for all drops
    const std::size_t max_np = *std::max_element(cfg.num_paths.begin(), cfg.num_paths.end());
    std::vector<PathParams> interferers;
    {
        CounterRng rng(derive_seed(cfg.seed, {stream_interferer}));
        for (std::size_t i = 0; i + 1 < max_np; ++i) {
            PathParams p;
            p.aod.value = rng.uniform(cfg.interferer_range.lo, cfg.interferer_range.hi);
            p.aoa.value = rng.uniform(cfg.interferer_range.lo, cfg.interferer_range.hi);
            interferers.push_back(p);
        }
    }
    for (std::size_t i = 0; i < interferers.size(); ++i) {
        Point pt{{"interferer", fmt_int(i + 1)}};
        rep.add(pt, "aod_deg", rad2deg(interferers[i].aod.value), cfg.trials, cfg.seed);
        rep.add(pt, "aoa_deg", rad2deg(interferers[i].aoa.value), cfg.trials, cfg.seed);
    }

    const double alpha_sq = static_cast<double>(arr.n_tx * arr.n_rx);
    const std::size_t ns = cfg.snr_db.size(), nt = cfg.trials;
    for (std::size_t np : cfg.num_paths) {
        std::vector<double> est(nt * ns);
        parallel_for(nt, cfg.threads, [&](std::size_t t) {
            CounterRng rng(derive_seed(cfg.seed, {stream_phase, t}));
            std::vector<PathParams> paths;
            paths.push_back({rng.unit_phase(), theta, phi});
            for (std::size_t i = 0; i + 1 < np; ++i) {
                PathParams p = interferers[i];
                p.gain = rng.unit_phase(); // equal gain, fresh phase per drop
                paths.push_back(p);
            }
            const ChannelInstance ch = build_channel(paths, tx_cfg, rx_cfg);
            for (std::size_t s = 0; s < ns; ++s) {
                // both auxiliary receive beams observe the same noise vector
                const Eigen::MatrixXcd y = measure(ch, f, w, NoiseModel::from_db(cfg.snr_db[s]),
                                                   derive_seed(cfg.seed, {stream_noise, t}));
                const PowerPair pp{std::norm(y(0, 0)), std::norm(y(1, 0)), pair};
                est[t * ns + s] = invert_ratio(ratio_from_powers(pp), pair).value;
            }
        });

        for (std::size_t s = 0; s < ns; ++s) {
            std::vector<double> v(nt);
            for (std::size_t t = 0; t < nt; ++t)
                v[t] = est[t * ns + s];
            double mse = 0.0;
            for (double x : v)
                mse += (x - cfg.psi) * (x - cfg.psi);
            mse /= static_cast<double>(nt);

            VarianceInputs in;
            in.rx_pair = pair;
            in.rx_cfg = rx_cfg;
            in.true_rx_freq = {cfg.psi};
            in.alpha_sq = alpha_sq;
            in.snr_linear = NoiseModel::from_db(cfg.snr_db[s]).snr_linear;
            if (np > 1)
                in.interferers = Interference{tx_cfg, mu, {interferers.begin(), interferers.begin() + static_cast<std::ptrdiff_t>(np - 1)}};
            const VariancePrediction sum_pred = variance_multipath(in, VarianceVariant::sum_matrix);
            const VariancePrediction written = variance_multipath(in, VarianceVariant::as_written);
            const double mc = sample_variance(v);

            Point pt = array_point(arr);
            pt.emplace_back("num_paths", fmt_int(np));
            pt.emplace_back("snr_db", format_number(cfg.snr_db[s]));
            rep.add(pt, "mc_variance", mc, nt, cfg.seed);
            rep.add(pt, "mc_mse", mse, nt, cfg.seed);
            rep.add(pt, "pred_sum_matrix", sum_pred.value, nt, cfg.seed);
            rep.add(pt, "pred_as_written", written.value, nt, cfg.seed);
            rep.add(pt, "as_written_divergent", written.divergent ? 1.0 : 0.0, nt, cfg.seed);
            rep.add(pt, "ratio_mc_over_sum_matrix", sum_pred.value > 0 ? mc / sum_pred.value : std::nan(""), nt,
                    cfg.seed);
        }
    }
    return rep;
}

MetricReport run_multipath_matrix_mse(const ExperimentConfig &cfg) {
    check_kind(cfg, ExperimentKind::multipath_mse);
    MetricReport rep;
    rep.experiment = to_string(cfg.kind);
    const std::size_t nb = cfg.budgets.size(), ns = cfg.snr_db.size(), nt = cfg.trials, np = cfg.paths;
    std::vector<NoiseModel> noises;
    for (double s : cfg.snr_db)
        noises.push_back(NoiseModel::from_db(s));
    MultipathOptions opts;
    opts.row_mode = cfg.row_mode;

    for (const ArraySize &arr : cfg.arrays) {
        const Grids g = make_grids(cfg, arr);
        opts.feedback = make_feedback(cfg, g.tx, derive_seed(cfg.seed, {stream_codebook, arr.n_tx}));
        // [trial][budget][snr][abp, gob]
        std::vector<double> err(nt * nb * ns * 2, 0.0);
        parallel_for(nt, cfg.threads, [&](std::size_t t) {
            const auto paths = sample_paths(derive_seed(cfg.seed, {stream_channel, t}), np, cfg.angle_range, cfg.gain_law);
            const ChannelInstance ch = build_channel(paths, g.tx.cfg, g.rx.cfg);
            Eigen::MatrixXcd a_t(static_cast<Eigen::Index>(arr.n_tx), static_cast<Eigen::Index>(np));
            for (std::size_t l = 0; l < np; ++l)
                a_t.col(static_cast<Eigen::Index>(l)) =
                    steering_vector(angle_to_spatial_freq(paths[l].aod, g.tx.cfg), g.tx.cfg);
            for (std::size_t b = 0; b < nb; ++b) {
                const ProbingSchedule sched =
                    random_probing_schedule(g.tx, g.rx, cfg.n_rf, cfg.m_rf, cfg.budgets[b].n_t, cfg.budgets[b].m_t,
                                            derive_seed(cfg.seed, {stream_schedule, t, b}), cfg.schedule_mode);
                for (std::size_t s = 0; s < ns; ++s) {
                    const MultipathEstimate est = estimate_multipath(ch, sched, g.tx, g.rx, noises[s], np,
                                                                     derive_seed(cfg.seed, {stream_noise, t, b}), opts);
                    Eigen::MatrixXcd gob(a_t.rows(), a_t.cols());
                    for (std::size_t l = 0; l < np; ++l)
                        gob.col(static_cast<Eigen::Index>(l)) =
                            g.tx.beams.col(est.trace.paths[l].tx_selection.peak_beam);
                    double *o = &err[((t * nb + b) * ns + s) * 2];
                    o[0] = matched_matrix_error(a_t, est.a_t_hat);
                    o[1] = matched_matrix_error(a_t, gob);
                }
            }
        });
        const double floor = static_cast<double>(np) * gob_quantization_floor(g.tx, cfg.angle_range);
        for (std::size_t b = 0; b < nb; ++b) {
            for (std::size_t s = 0; s < ns; ++s) {
                double abp = 0.0, gb = 0.0;
                for (std::size_t t = 0; t < nt; ++t) {
                    abp += err[((t * nb + b) * ns + s) * 2];
                    gb += err[((t * nb + b) * ns + s) * 2 + 1];
                }
                Point pt = array_point(arr);
                pt.emplace_back("n_t", fmt_int(cfg.budgets[b].n_t));
                pt.emplace_back("m_t", fmt_int(cfg.budgets[b].m_t));
                pt.emplace_back("budget", fmt_int(cfg.budgets[b].n_t * cfg.budgets[b].m_t));
                pt.emplace_back("snr_db", format_number(cfg.snr_db[s]));
                rep.add(pt, "abp_trace_error", abp / static_cast<double>(nt), nt, cfg.seed);
                rep.add(pt, "gob_trace_error", gb / static_cast<double>(nt), nt, cfg.seed);
            }
        }
        rep.add(array_point(arr), "gob_floor_analytic", floor, nt, cfg.seed);
    }
    return rep;
}

MetricReport run_control_channel(const ExperimentConfig &cfg) {
    check_kind(cfg, ExperimentKind::control_channel);
    MetricReport rep;
    rep.experiment = to_string(cfg.kind);
    const std::size_t n = cfg.arrays.front().n_tx;
    const UlaConfig tx_cfg = make_ula(n, cfg.spacing);
    const UlaConfig ue_cfg = make_ula(1, cfg.spacing);
    const auto &widths = cfg.beam_widths_deg;
    const std::size_t layers = widths.size();

    // attempts: ABP forms one pair per layer; GoB tiles the previous range exhaustively
    std::vector<std::size_t> gob_counts;
    double range = cfg.sector_deg;
    for (double w : widths) {
        gob_counts.push_back(static_cast<std::size_t>(std::ceil(range / w - 1e-9)));
        range = w;
    }
    const std::size_t abp_attempts = 2 * layers;
    const std::size_t gob_attempts = std::accumulate(gob_counts.begin(), gob_counts.end(), std::size_t{0});

    auto active = [&](double half_width_rad) {
        const auto a = static_cast<std::size_t>(std::lround(pi / half_width_rad));
        return std::clamp<std::size_t>(a, 1, n);
    };

    const std::size_t ns = cfg.snr_db.size(), nt = cfg.trials;
    const double delta1 = deg2rad(widths.front()) / 2.0;
    std::vector<double> errs(nt * ns * 2);
    parallel_for(nt, cfg.threads, [&](std::size_t t) {
        CounterRng rng(derive_seed(cfg.seed, {stream_ue, t}));
        // UE inside the first layer's resolvable range
        const double mu = rng.uniform(-delta1, delta1);
        PathParams p{rng.unit_phase(), spatial_freq_to_angle({mu}, tx_cfg), PhysicalAngle{0.0}};
        const ChannelInstance ch = build_channel(std::span<const PathParams>(&p, 1), tx_cfg, ue_cfg);
        const Eigen::MatrixXcd one = Eigen::MatrixXcd::Ones(1, 1);
        for (std::size_t s = 0; s < ns; ++s) {
            const NoiseModel noise = NoiseModel::from_db(cfg.snr_db[s]);
            std::uint64_t slot = 0;
            auto probe = [&](const SteeringVector &f) {
                return std::norm(measure(ch, f, one, noise, derive_seed(cfg.seed, {stream_noise, t, slot++}))(0, 0));
            };
            // ABP hierarchy
            double center = 0.0;
            for (std::size_t k = 0; k < layers; ++k) {
                const double d = deg2rad(widths[k]) / 2.0;
                const AuxiliaryBeamPair pair{{center}, d, 0, 1};
                const std::size_t na = active(d);
                const PowerPair pp{probe(subaperture_beam(pair.low_freq(), na, tx_cfg)),
                                   probe(subaperture_beam(pair.high_freq(), na, tx_cfg)), pair};
                center = invert_ratio(ratio_from_powers(pp), pair).value;
            }
            // GoB hierarchy
            double lo = -deg2rad(cfg.sector_deg) / 2.0;
            double gob_center = 0.0;
            for (std::size_t k = 0; k < layers; ++k) {
                const double w = deg2rad(widths[k]);
                const std::size_t na = active(w / 2.0);
                double best = -1.0;
                for (std::size_t i = 0; i < gob_counts[k]; ++i) {
                    const double c = lo + (static_cast<double>(i) + 0.5) * w;
                    const double pw = probe(subaperture_beam({c}, na, tx_cfg));
                    if (pw > best) {
                        best = pw;
                        gob_center = c;
                    }
                }
                lo = gob_center - w / 2.0;
            }
            errs[(t * ns + s) * 2] = std::abs(rad2deg(center - mu));
            errs[(t * ns + s) * 2 + 1] = std::abs(rad2deg(gob_center - mu));
        }
    });

    Point base{{"n_tx", fmt_int(n)}, {"layers", fmt_int(layers)}};
    rep.add(base, "attempts_abp", static_cast<double>(abp_attempts), nt, cfg.seed);
    rep.add(base, "attempts_gob", static_cast<double>(gob_attempts), nt, cfg.seed);
    rep.add(base, "overhead_reduction", 1.0 - static_cast<double>(abp_attempts) / static_cast<double>(gob_attempts), nt,
            cfg.seed);
    rep.add(base, "final_half_width_deg", widths.back() / 2.0, nt, cfg.seed);
    for (std::size_t s = 0; s < ns; ++s) {
        std::vector<double> a(nt), g(nt);
        for (std::size_t t = 0; t < nt; ++t) {
            a[t] = errs[(t * ns + s) * 2];
            g[t] = errs[(t * ns + s) * 2 + 1];
        }
        Point pt = base;
        pt.emplace_back("snr_db", format_number(cfg.snr_db[s]));
        rep.add(pt, "abp_error_mean_deg", mean(a), nt, cfg.seed);
        rep.add(pt, "abp_error_max_deg", *std::max_element(a.begin(), a.end()), nt, cfg.seed);
        rep.add(pt, "gob_error_mean_deg", mean(g), nt, cfg.seed);
        rep.add(pt, "gob_error_max_deg", *std::max_element(g.begin(), g.end()), nt, cfg.seed);
    }
    return rep;
}

MetricReport run_rician_study(const ExperimentConfig &cfg) {
    check_kind(cfg, ExperimentKind::rician);
    MetricReport rep;
    rep.experiment = to_string(cfg.kind);
    const std::size_t nk = cfg.k_factor_db.size(), ns = cfg.snr_db.size(), nt = cfg.trials;
    std::vector<NoiseModel> noises;
    for (double s : cfg.snr_db)
        noises.push_back(NoiseModel::from_db(s));

    for (std::size_t ai = 0; ai < cfg.arrays.size(); ++ai) {
        const ArraySize &arr = cfg.arrays[ai];
        const Grids g = make_grids(cfg, arr);
        const FeedbackConfig fb = make_feedback(cfg, g.tx, derive_seed(cfg.seed, {stream_codebook, ai}));
        // [trial][k][snr][sq_aod, sq_aoa, gain_est, gain_perfect]
        std::vector<double> out(nt * nk * ns * 4);
        parallel_for(nt, cfg.threads, [&](std::size_t t) {
            const PathParams los =
                sample_paths(derive_seed(cfg.seed, {stream_channel, t}), 1, cfg.angle_range, cfg.gain_law)[0];
            auto nlos = sample_paths(derive_seed(cfg.seed, {stream_nlos, t}), cfg.num_nlos, cfg.angle_range,
                                     GainLaw::complex_normal);
            for (auto &p : nlos)
                p.gain /= std::sqrt(static_cast<double>(cfg.num_nlos));
            const SteeringVector at = steering_vector(angle_to_spatial_freq(los.aod, g.tx.cfg), g.tx.cfg);
            const SteeringVector ar = steering_vector(angle_to_spatial_freq(los.aoa, g.rx.cfg), g.rx.cfg);
            const std::uint64_t noise_key = derive_seed(cfg.seed, {stream_noise, t});
            for (std::size_t k = 0; k < nk; ++k) {
                const RicianConfig rc{cfg.k_factor_db[k], cfg.num_nlos};
                const ChannelInstance ch = build_rician(los, nlos, rc, g.tx.cfg, g.rx.cfg);
                const Eigen::MatrixXcd response = g.rx.beams.adjoint() * (ch.matrix * g.tx.beams);
                const double gain_perfect = effective_gain(ch, at, ar);
                for (std::size_t s = 0; s < ns; ++s) {
                    const Eigen::MatrixXcd y = add_tdm_noise(response, g.rx.beams, noises[s], noise_key);
                    const SinglePathEstimate est = estimate_from_sweep(y, g.tx, g.rx, fb);
                    const double e1 = est.aod.angle.value - los.aod.value;
                    const double e2 = est.aoa.angle.value - los.aoa.value;
                    double *o = &out[((t * nk + k) * ns + s) * 4];
                    o[0] = e1 * e1;
                    o[1] = e2 * e2;
                    o[2] = effective_gain(ch, steering_vector(est.aod.spatial_freq, g.tx.cfg),
                                          steering_vector(est.aoa.spatial_freq, g.rx.cfg));
                    o[3] = gain_perfect;
                }
            }
        });
        for (std::size_t k = 0; k < nk; ++k) {
            for (std::size_t s = 0; s < ns; ++s) {
                double s1 = 0.0, s2 = 0.0;
                std::vector<double> ge(nt), gp(nt);
                for (std::size_t t = 0; t < nt; ++t) {
                    const double *o = &out[((t * nk + k) * ns + s) * 4];
                    s1 += o[0];
                    s2 += o[1];
                    ge[t] = o[2];
                    gp[t] = o[3];
                }
                Point pt = array_point(arr);
                pt.emplace_back("k_factor_db", format_number(cfg.k_factor_db[k]));
                pt.emplace_back("snr_db", format_number(cfg.snr_db[s]));
                rep.add(pt, "mse_aod", s1 / static_cast<double>(nt), nt, cfg.seed);
                rep.add(pt, "mse_aoa", s2 / static_cast<double>(nt), nt, cfg.seed);
                rep.add(pt, "gain_estimated_mean", mean(ge), nt, cfg.seed);
                rep.add(pt, "gain_perfect_mean", mean(gp), nt, cfg.seed);
                for (int q = 5; q <= 95; q += 5) {
                    const std::string tag = (q < 10 ? "0" : "") + std::to_string(q);
                    rep.add(pt, "gain_estimated_q" + tag, quantile(ge, q / 100.0), nt, cfg.seed);
                    rep.add(pt, "gain_perfect_q" + tag, quantile(gp, q / 100.0), nt, cfg.seed);
                }
            }
        }
    }
    return rep;
}

MetricReport run_experiment(const ExperimentConfig &cfg) {
    switch (cfg.kind) {
    case ExperimentKind::single_path_mse:
        return run_single_path_mse(cfg);
    case ExperimentKind::variance:
        return run_variance_validation(cfg);
    case ExperimentKind::quantization:
        return run_quantization_study(cfg);
    case ExperimentKind::multipath_mse:
        return run_multipath_matrix_mse(cfg);
    case ExperimentKind::maee:
        return run_maee_tradeoff(cfg);
    case ExperimentKind::control_channel:
        return run_control_channel(cfg);
    case ExperimentKind::rician:
        return run_rician_study(cfg);
    }
    throw ConfigError("unknown experiment kind");
}

} // namespace abp
