#include "abp/abp_estimator.hpp"
#include "abp/random.hpp"
#include "abp/sim_harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace abp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string &name, const std::function<Outcome()> &check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception &e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass)
        ++failures;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), sec);
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ChannelInstance one_path(double mu, double psi, const UlaConfig &tx, const UlaConfig &rx, cd g) {
    const std::vector<PathParams> p{{g, spatial_freq_to_angle({mu}, tx), spatial_freq_to_angle({psi}, rx)}};
    return build_channel(p, tx, rx);
}

Outcome round_trip() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = 8, m = 8;
    const auto tx = make_ula(n), rx = make_ula(m);
    const auto gt = build_pair_grid({-pi, pi}, exact_offset(n), tx);
    const auto gr = build_pair_grid({-pi, pi}, exact_offset(m), rx);
    CounterRng rng(derive_seed(1, {101}));
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const double mu = rng.uniform(gt.coverage.lo, gt.coverage.hi);
        const double psi = gr.beam_freqs[rng.index(gr.num_beams())].value; // receive beam aligned
        const auto est = estimate_single_path(one_path(mu, psi, tx, rx, rng.unit_phase()), gt, gr, NoiseModel::noiseless(),
                                              static_cast<std::uint64_t>(t));
        worst = std::max(worst, std::abs(wrap_phase(est.aod.spatial_freq.value - mu)));
    }
    const double sec = seconds_since(t0);
    std::ostringstream s;
    s << "N=M=8, delta=pi/8, 1000 draws, max |mu_hat-mu| = " << worst << ", runtime " << sec << " s";
    return {worst < 1e-9 && sec < 1.0, s.str()};
}

Outcome ratio_inversion() {
    CounterRng rng(derive_seed(1, {102}));
    std::size_t non_monotone = 0;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const double nu = rng.uniform(-pi, pi);
        const double delta = rng.uniform(1e-3, pi / 2);
        const AuxiliaryBeamPair pair{{nu}, delta, 0, 1};
        double prev = 2.0;
        for (int i = 0; i < 1000; ++i) {
            const double mu = nu - delta + 2.0 * delta * (i + 0.5) / 1000.0;
            const double z = ratio_metric_closed_form({mu}, pair).value;
            if (!(z < prev))
                ++non_monotone;
            prev = z;
            worst = std::max(worst, std::abs(invert_ratio({z}, pair).value - mu));
        }
    }
    std::ostringstream s;
    s << "1000 (nu, delta) pairs x 1000 points, delta in (0, pi/2]; monotonicity violations " << non_monotone
      << ", max inversion error " << worst;
    return {non_monotone == 0 && worst < 1e-9, s.str()};
}

Outcome pair_selection() {
    const std::size_t n = 16, m = 16;
    const auto tx = make_ula(n), rx = make_ula(m);
    const auto gt = build_pair_grid({-pi, pi}, default_offset(n), tx);
    const auto gr = build_pair_grid({-pi, pi}, default_offset(m), rx);
    CounterRng rng(derive_seed(1, {103}));
    int hits = 0, trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const auto i = rng.index(gt.num_pairs());
        const auto j = rng.index(gr.num_pairs());
        const double mu = gt.pairs[i].boresight.value + gt.offset * rng.uniform(-0.99, 0.99);
        const double psi = gr.pairs[j].boresight.value + gr.offset * rng.uniform(-0.99, 0.99);
        const auto est = estimate_single_path(one_path(mu, psi, tx, rx, rng.unit_phase()), gt, gr, NoiseModel::noiseless(),
                                              static_cast<std::uint64_t>(t));
        if (est.aod.pair_id == static_cast<int>(i) && est.aoa.pair_id == static_cast<int>(j))
            ++hits;
    }
    std::ostringstream s;
    s << "N=M=16, delta=(pi/2)/16, noiseless sweeps: " << hits << "/" << trials << " selected the pair containing mu and psi";
    return {hits == trials, s.str()};
}

const MetricReport &variance_report() {
    static const MetricReport r = run_variance_validation(default_config(ExperimentKind::variance));
    return r;
}

Outcome variance_single() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = default_config(ExperimentKind::variance);
    const auto &r = variance_report();
    const double sec = seconds_since(t0);
    bool ok = sec < 120.0;
    bool divergent = true;
    std::ostringstream s;
    s << "M=4, N=8, delta_r=pi/8, psi=0, " << cfg.trials << " drops; MC/sum-matrix:";
    for (double snr : cfg.snr_db) {
        const std::map<std::string, std::string> at{{"num_paths", "1"}, {"snr_db", format_number(snr)}};
        const double ratio = r.value("ratio_mc_over_sum_matrix", at);
        ok = ok && ratio >= 0.5 && ratio <= 2.0;
        divergent = divergent && r.value("as_written_divergent", at) == 1.0;
        s << " " << format_number(snr) << "dB=" << ratio;
    }
    s << "; as-written variant " << (divergent ? "singular at psi=0 at every SNR" : "finite");
    return {ok, s.str()};
}

Outcome variance_multi() {
    const auto cfg = default_config(ExperimentKind::variance);
    const auto &r = variance_report();
    bool ok = true;
    std::ostringstream s;
    s << "N_p 1 -> 8:";
    for (double snr : cfg.snr_db) {
        const auto snr_s = format_number(snr);
        const double v1 = r.value("mc_variance", {{"num_paths", "1"}, {"snr_db", snr_s}});
        const double v8 = r.value("mc_variance", {{"num_paths", "8"}, {"snr_db", snr_s}});
        const double ratio = r.value("ratio_mc_over_sum_matrix", {{"num_paths", "8"}, {"snr_db", snr_s}});
        ok = ok && v8 > v1 && ratio >= 0.5 && ratio <= 2.0;
        s << " " << snr_s << "dB var " << v1 << "->" << v8 << " (MC/pred " << ratio << ")";
    }
    return {ok, s.str()};
}

Outcome quantization() {
    const auto cfg = default_config(ExperimentKind::quantization);
    const auto r = run_quantization_study(cfg);
    bool ok = true;
    std::ostringstream s;
    s << cfg.codebook_samples << " samples;";
    for (const char *b : {"2", "3", "4"}) {
        const double qr = r.value("quant_mse_ratio", {{"bits", b}});
        const double qf = r.value("quant_mse_frequency", {{"bits", b}});
        ok = ok && qr < qf;
        s << " " << b << " bits ratio " << qr << " < freq " << qf << ";";
    }
    const auto snr = format_number(cfg.snr_db.front());
    const double q6 = r.value("mse_aod", {{"snr_db", snr}, {"feedback", "ratio"}, {"bits", "6"}});
    const double none = r.value("mse_aod", {{"snr_db", snr}, {"feedback", "none"}, {"bits", "0"}});
    const double rel = std::abs(q6 - none) / none;
    ok = ok && rel <= 0.10;
    s << " 6-bit angle MSE " << q6 << " vs unquantized " << none << " (rel " << rel << ")";
    return {ok, s.str()};
}

Outcome multipath() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = default_config(ExperimentKind::multipath_mse);
    const auto r = run_multipath_matrix_mse(cfg);
    const double sec = seconds_since(t0);
    const std::map<std::string, std::string> big{{"n_t", "20"}, {"m_t", "20"}};
    bool below = true;
    std::ostringstream s;
    s << "N=M=8, N_p=3, 20x20, " << cfg.trials << " trials; ABP vs GoB:";
    double hi_snr = -1e300;
    for (double snr : cfg.snr_db) {
        hi_snr = std::max(hi_snr, snr);
        if (snr < 10.0)
            continue;
        auto at = big;
        at["snr_db"] = format_number(snr);
        const double a = r.value("abp_trace_error", at);
        const double g = r.value("gob_trace_error", at);
        below = below && a < g;
        s << " " << format_number(snr) << "dB " << a << "/" << g;
    }
    auto at = big;
    at["snr_db"] = format_number(hi_snr);
    const double gob = r.value("gob_trace_error", at);
    const double floor = r.value("gob_floor_analytic");
    const double rel = gob / floor;
    const bool floor_ok = rel >= 0.75 && rel <= 1.25;
    s << "; GoB at " << format_number(hi_snr) << " dB " << gob << " vs analytic floor " << floor << " (ratio " << rel
      << ", needs 0.75..1.25)";
    s << "; ABP<GoB " << (below ? "holds" : "violated") << "; runtime " << sec << " s";
    return {below && floor_ok && sec < 600.0, s.str()};
}

Outcome control_channel() {
    auto cfg = default_config(ExperimentKind::control_channel);
    const auto r = run_control_channel(cfg);
    const double a = r.value("attempts_abp"), g = r.value("attempts_gob"), red = r.value("overhead_reduction");
    std::ostringstream s;
    s << "attempts ABP " << a << ", GoB " << g << ", reduction " << red;
    return {a == 6.0 && g == 10.0 && std::abs(red - 0.4) < 1e-12, s.str()};
}

Outcome trends() {
    const auto cfg = default_config(ExperimentKind::single_path_mse);
    const auto r = run_single_path_mse(cfg);
    constexpr double tol = 1.05;
    bool ok = true;
    std::ostringstream s;
    s << cfg.trials << " trials;";
    for (const char *metric : {"mse_aod", "mse_aoa"}) {
        for (const auto &arr : cfg.arrays) {
            const auto n = std::to_string(arr.n_tx);
            for (std::size_t i = 1; i < cfg.snr_db.size(); ++i) {
                const double prev = r.value(metric, {{"n_tx", n}, {"snr_db", format_number(cfg.snr_db[i - 1])}});
                const double cur = r.value(metric, {{"n_tx", n}, {"snr_db", format_number(cfg.snr_db[i])}});
                if (cur > tol * prev) {
                    ok = false;
                    s << " " << metric << " N=" << n << " rises " << prev << "->" << cur << " at " << format_number(cfg.snr_db[i])
                      << "dB;";
                }
            }
        }
        for (double snr : cfg.snr_db) {
            const auto sn = format_number(snr);
            for (std::size_t a = 1; a < cfg.arrays.size(); ++a) {
                const double prev = r.value(metric, {{"n_tx", std::to_string(cfg.arrays[a - 1].n_tx)}, {"snr_db", sn}});
                const double cur = r.value(metric, {{"n_tx", std::to_string(cfg.arrays[a].n_tx)}, {"snr_db", sn}});
                if (cur > tol * prev) {
                    ok = false;
                    s << " " << metric << " rises with N at " << sn << "dB " << prev << "->" << cur << ";";
                }
            }
        }
    }
    s << " mse_aod at 20 dB N=8/16/32:";
    for (const auto &arr : cfg.arrays)
        s << " " << r.value("mse_aod", {{"n_tx", std::to_string(arr.n_tx)}, {"snr_db", "20"}});
    if (ok)
        s << "; monotone in SNR (-10..20 dB) and N (8, 16, 32) within 5%";
    return {ok, s.str()};
}

} // namespace

int main() {
    report(1, "round-trip exactness", round_trip);
    report(2, "ratio metric monotone and invertible", ratio_inversion);
    report(3, "pair selection", pair_selection);
    report(4, "single-path variance vs prediction", variance_single);
    report(5, "interferers raise variance", variance_multi);
    report(6, "quantization ordering", quantization);
    report(7, "multi-path matrix MSE", multipath);
    report(8, "control channel attempts", control_channel);
    report(9, "single-path trends", trends);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
