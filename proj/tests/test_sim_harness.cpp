#include "abp/errors.hpp"
#include "abp/sim_harness.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace abp;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

ExperimentConfig single_cfg(std::vector<ArraySize> arrays, std::vector<double> snr, std::size_t trials) {
    auto c = default_config(ExperimentKind::single_path_mse);
    c.arrays = std::move(arrays);
    c.snr_db = std::move(snr);
    c.trials = trials;
    return c;
}

} // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(10.0) == "10");
    CHECK(format_number(13.2) == "13.2");
    CHECK(format_number(-10.0) == "-10");
    CHECK(format_number(inf) == "inf");
    CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("experiment kind and offset rule spellings") {
    for (auto k : {ExperimentKind::single_path_mse, ExperimentKind::variance, ExperimentKind::quantization,
                   ExperimentKind::multipath_mse, ExperimentKind::maee, ExperimentKind::control_channel,
                   ExperimentKind::rician})
        CHECK(parse_experiment_kind(to_string(k)) == k);
    CHECK(to_string(ExperimentKind::multipath_mse) == "multipath-mse");
    CHECK_THROWS_AS(parse_experiment_kind("nope"), ConfigError);
    CHECK(parse_offset_rule(to_string(OffsetRule::exact)) == OffsetRule::exact);
}

TEST_CASE("offset rules on the config") {
    auto c = default_config(ExperimentKind::single_path_mse);
    CHECK(c.offset_tx(16) == doctest::Approx(pi / 32));
    c.offset_rule = OffsetRule::exact;
    CHECK(c.offset_rx(8) == doctest::Approx(pi / 8));
    c.offset_rule = OffsetRule::fixed;
    c.delta_tx = 0.2;
    c.delta_rx = 0.3;
    CHECK(c.offset_tx(16) == 0.2);
    CHECK(c.offset_rx(16) == 0.3);
}

TEST_CASE("config validation") {
    auto c = default_config(ExperimentKind::single_path_mse);
    CHECK_NOTHROW(c.validate());
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = default_config(ExperimentKind::single_path_mse);
    c.snr_db.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    auto cc = default_config(ExperimentKind::control_channel);
    cc.beam_widths_deg = {60.0, 90.0};
    CHECK_THROWS_AS(cc.validate(), ConfigError);
    cc.beam_widths_deg = {150.0};
    CHECK_THROWS_AS(cc.validate(), ConfigError);
}

TEST_CASE("JSON and TOML descriptors") {
    const auto j = config_from_json(R"({"arrays": [[8, 4]], "snr_db": [0, "inf"], "trials": 7, "seed": 42,
                                       "offset_rule": "exact", "feedback": "ratio", "bits": 3})",
                                    ExperimentKind::single_path_mse);
    REQUIRE(j.arrays.size() == 1);
    CHECK(j.arrays[0].n_tx == 8);
    CHECK(j.arrays[0].n_rx == 4);
    CHECK(j.snr_db.size() == 2);
    CHECK(std::isinf(j.snr_db[1]));
    CHECK(j.trials == 7);
    CHECK(j.seed == 42);
    CHECK(j.offset_rule == OffsetRule::exact);
    CHECK(j.feedback == FeedbackMode::ratio);
    CHECK(j.bits == 3);

    const auto t = config_from_toml("arrays = [[16, 8]]\nsnr_db = [-10.0]\ntrials = 5\nk_factor_db = [2.0]\n",
                                    ExperimentKind::rician);
    CHECK(t.arrays[0].n_tx == 16);
    CHECK(t.snr_db == std::vector<double>{-10.0});
    CHECK(t.k_factor_db == std::vector<double>{2.0});

    CHECK_THROWS_AS(config_from_json(R"({"bogus": 1})", ExperimentKind::variance), ConfigError);
    CHECK_THROWS_AS(config_from_json("{not json", ExperimentKind::variance), ConfigError);
    CHECK_THROWS_AS(config_from_toml("trials = [", ExperimentKind::variance), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"trials": 0})", ExperimentKind::variance), ConfigError);

    // echo round trip
    const auto again = config_from_json(config_to_json(j), ExperimentKind::single_path_mse);
    CHECK(config_to_json(again) == config_to_json(j));
}

TEST_CASE("metric report lookup and CSV") {
    MetricReport r;
    r.experiment = "x";
    r.add({{"n_tx", "8"}, {"snr_db", "0"}}, "mse_aod", 0.5, 10, 1);
    r.add({{"n_tx", "8"}, {"snr_db", "10"}}, "mse_aod", 0.25, 10, 1);
    CHECK(r.value("mse_aod", {{"snr_db", "10"}}) == 0.25);
    CHECK(r.find("mse_aod").point_string() == "n_tx=8;snr_db=0");
    CHECK_THROWS_AS(r.value("mse_aoa"), ContractError);
    const auto csv = r.to_csv();
    CHECK(csv.rfind("experiment,point,metric,value,trials,seed\n", 0) == 0);
    CHECK(csv.find("x,n_tx=8;snr_db=10,mse_aod,0.25,10,1") != std::string::npos);
    CHECK(r.to_json().find("\"mse_aod\"") != std::string::npos);
}

TEST_CASE("matched matrix error and quadrature floor") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(6, 3);
    Eigen::MatrixXcd b(6, 3);
    b << a.col(2), a.col(0), a.col(1);
    CHECK(matched_matrix_error(a, b) == doctest::Approx(0.0));
    CHECK(matched_matrix_error(a, a) == 0.0);
    CHECK_THROWS_AS(matched_matrix_error(a, Eigen::MatrixXcd::Zero(6, 2)), ContractError);

    // floor shrinks as the grid gets finer
    const auto coarse = build_pair_grid({-pi, pi}, pi / 8, make_ula(8));
    const auto fine = build_pair_grid({-pi, pi}, pi / 32, make_ula(8));
    CHECK(gob_quantization_floor(fine) < gob_quantization_floor(coarse));
    CHECK(gob_quantization_floor(coarse) > 0.0);
}

TEST_CASE("reports are bit identical across runs and thread counts") {
    auto c = single_cfg({{8, 8}}, {0.0, 10.0}, 300);
    c.threads = 1;
    const auto a = run_single_path_mse(c).to_csv();
    c.threads = 3;
    const auto b = run_single_path_mse(c).to_csv();
    CHECK(a == b);
    CHECK(run_single_path_mse(c).to_csv() == b);
    c.seed = 2;
    CHECK(run_single_path_mse(c).to_csv() != b);
}

TEST_CASE("noiseless exact-offset single path has negligible MSE") {
    auto c = single_cfg({{8, 8}, {16, 16}}, {inf}, 1000);
    c.offset_rule = OffsetRule::exact;
    const auto r = run_single_path_mse(c);
    for (const char *n : {"8", "16"}) {
        CHECK(r.value("mse_aod", {{"n_tx", n}}) < 1e-16);
        CHECK(r.value("mse_aoa", {{"n_tx", n}}) < 1e-16);
    }
}

TEST_CASE("single-path MSE drops from 0 dB to 10 dB at N=16") {
    const auto r = run_single_path_mse(single_cfg({{16, 16}}, {0.0, 10.0}, 10000));
    CHECK(r.value("mse_aod", {{"snr_db", "0"}}) >= r.value("mse_aod", {{"snr_db", "10"}}));
    CHECK(r.value("mse_aoa", {{"snr_db", "0"}}) >= r.value("mse_aoa", {{"snr_db", "10"}}));
}

TEST_CASE("single-path MSE drops when N_tot doubles at 10 dB") {
    const auto r = run_single_path_mse(single_cfg({{16, 16}, {32, 16}}, {10.0}, 10000));
    CHECK(r.value("mse_aod", {{"n_tx", "32"}}) < r.value("mse_aod", {{"n_tx", "16"}}));
    CHECK(r.value("mse_freq_aod", {{"n_tx", "32"}}) < r.value("mse_freq_aod", {{"n_tx", "16"}}));
}

TEST_CASE("spectral efficiency with 4-bit ratio feedback is within 95% of perfect CSI") {
    auto c = single_cfg({{8, 8}, {16, 16}}, {0.0}, 10000);
    c.feedback = FeedbackMode::ratio;
    c.bits = 4;
    const auto r = run_single_path_mse(c);
    for (const char *n : {"8", "16"}) {
        const double est = r.value("se_estimated", {{"n_tx", n}, {"feedback", "ratio"}, {"bits", "4"}});
        const double perf = r.value("se_perfect", {{"n_tx", n}});
        MESSAGE("N=" << std::string(n) << " SE ratio " << est / perf);
        CHECK(est >= 0.95 * perf);
    }
}

TEST_CASE("disabled quantization equals the unquantized estimator") {
    auto c = single_cfg({{8, 8}}, {0.0}, 500);
    const auto plain = run_single_path_mse(c);
    c.feedback = FeedbackMode::ratio;
    c.bits = 0;
    const auto off = run_single_path_mse(c);
    CHECK(off.value("mse_aod") == plain.value("mse_aod"));
    CHECK(off.to_csv() == plain.to_csv());
}

TEST_CASE("variance study: noiseless ordering and interferer effect") {
    auto c = default_config(ExperimentKind::variance);
    c.snr_db = {inf, 20.0};
    c.trials = 2000;
    const auto r = run_variance_validation(c);
    const double mc_clean = r.value("mc_variance", {{"num_paths", "1"}, {"snr_db", "inf"}});
    const double pred = r.value("pred_sum_matrix", {{"num_paths", "1"}, {"snr_db", "20"}});
    CHECK(mc_clean < pred);
    CHECK(r.value("as_written_divergent", {{"num_paths", "1"}, {"snr_db", "20"}}) == 1.0);
    CHECK(r.value("mc_variance", {{"num_paths", "8"}, {"snr_db", "20"}}) >
          r.value("mc_variance", {{"num_paths", "1"}, {"snr_db", "20"}}));
}

TEST_CASE("quantization study: ratio codebook beats the frequency codebook") {
    auto c = default_config(ExperimentKind::quantization);
    c.codebook_samples = 50000;
    c.trials = 500;
    c.bits_list = {2, 3, 4};
    const auto r = run_quantization_study(c);
    for (const char *b : {"2", "3", "4"})
        CHECK(r.value("quant_mse_ratio_in_frequency", {{"bits", b}}) < r.value("quant_mse_frequency", {{"bits", b}}));
    CHECK(r.value("mse_aod", {{"feedback", "none"}, {"bits", "0"}}) > 0.0);
}

TEST_CASE("multipath study: GoB sits above its quantization floor at high SNR") {
    auto c = default_config(ExperimentKind::multipath_mse);
    c.budgets = {{20, 20}};
    c.snr_db = {30.0};
    c.trials = 100;
    const auto r = run_multipath_matrix_mse(c);
    const double floor = r.value("gob_floor_analytic");
    CHECK(r.value("gob_trace_error") >= floor);
    CHECK(r.value("abp_trace_error") < r.value("gob_trace_error"));
}

TEST_CASE("noiseless multipath with well separated paths has a small matrix error") {
    const std::size_t n = 64;
    const auto cfg = make_ula(n);
    const auto g = build_pair_grid({-pi, pi}, exact_offset(n), cfg);
    const double mu[3] = {-2.0, 0.1, 2.2};
    const double psi[3] = {1.9, -2.1, 0.0};
    std::vector<PathParams> paths;
    Eigen::MatrixXcd a_t(static_cast<Eigen::Index>(n), 3);
    for (int l = 0; l < 3; ++l) {
        paths.push_back({std::polar(1.0, 1.3 * l), spatial_freq_to_angle({mu[l]}, cfg), spatial_freq_to_angle({psi[l]}, cfg)});
        a_t.col(l) = steering_vector({mu[l]}, cfg);
    }
    const auto ch = build_channel(paths, cfg, cfg);
    const auto schedule = support::aligned_schedule(g, g, {mu[0], mu[1], mu[2]}, {psi[0], psi[1], psi[2]});
    const auto est = estimate_multipath(ch, schedule, g, g, NoiseModel::noiseless(), 3, 0);
    const double err = matched_matrix_error(a_t, est.a_t_hat);
    MESSAGE("noiseless well separated matrix error " << err);
    CHECK(err < 1e-3);
}

TEST_CASE("maee trade-off table") {
    auto c = default_config(ExperimentKind::maee);
    c.arrays = {{8, 8}, {32, 8}};
    c.snr_db = {-10.0};
    c.trials = 2000;
    c.tradeoff_sizes = {8};
    const auto r = run_maee_tradeoff(c);
    CHECK(r.value("iterations_rule", {{"n_ant", "8"}}) == doctest::Approx(64.0));
    CHECK(r.find("iterations_rule", {{"n_ant", "8"}}).point_string().find("delta_deg=11.25") != std::string::npos);
    // 2*pi of spatial frequency at 2*delta spacing: 17 beams per side
    CHECK(r.value("iterations_simulated", {{"n_ant", "8"}}) == 289.0);
    CHECK(r.value("maee_aod_deg", {{"n_tx", "32"}}) < r.value("maee_aod_deg", {{"n_tx", "8"}}));
}

TEST_CASE("maee below one degree at N=128, M=8, -10 dB") {
    auto c = default_config(ExperimentKind::maee);
    c.arrays = {{128, 8}};
    c.snr_db = {-10.0};
    c.trials = 2000;
    c.tradeoff_sizes = {};
    const double maee = run_maee_tradeoff(c).value("maee_aod_deg", {{"n_tx", "128"}});
    MESSAGE("MAEE N=128 M=8 at -10 dB: " << maee << " deg");
    CHECK(maee < 1.0);
}

TEST_CASE("control channel attempts and pointing error") {
    auto c = default_config(ExperimentKind::control_channel);
    c.trials = 300;
    const auto r = run_control_channel(c);
    CHECK(r.value("attempts_abp") == 6.0);
    CHECK(r.value("attempts_gob") == 10.0);
    CHECK(r.value("overhead_reduction") == doctest::Approx(0.4));
    CHECK(r.value("abp_error_max_deg", {{"snr_db", "inf"}}) <= c.beam_widths_deg.back());
}

TEST_CASE("rician study trends") {
    auto c = default_config(ExperimentKind::rician);
    c.trials = 3000;
    c.k_factor_db = {2.0, 13.2, 100.0};
    const auto r = run_rician_study(c);
    CHECK(r.value("mse_aod", {{"k_factor_db", "13.2"}}) <= r.value("mse_aod", {{"k_factor_db", "2"}}));
    CHECK(r.value("gain_estimated_q50", {{"k_factor_db", "13.2"}}) >=
          0.9 * r.value("gain_perfect_q50", {{"k_factor_db", "13.2"}}));

    auto s = single_cfg(c.arrays, c.snr_db, c.trials);
    const double single = run_single_path_mse(s).value("mse_aod");
    const double los = r.value("mse_aod", {{"k_factor_db", "100"}});
    CHECK(std::abs(los - single) <= 0.1 * single);
}

TEST_CASE("run_experiment dispatches on the kind") {
    auto c = default_config(ExperimentKind::control_channel);
    c.trials = 10;
    CHECK(run_experiment(c).experiment == "control-channel");
    auto bad = default_config(ExperimentKind::variance);
    CHECK_THROWS_AS(run_rician_study(bad), ConfigError);
}
