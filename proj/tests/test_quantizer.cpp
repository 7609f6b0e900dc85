#include "abp/errors.hpp"
#include "abp/quantizer.hpp"
#include "abp/random.hpp"
#include "abp/sim_harness.hpp"

#include <doctest.h>

#include <cmath>

using namespace abp;

namespace {

std::vector<double> symmetric_samples(std::size_t half, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<double> s;
    for (std::size_t i = 0; i < half; ++i) {
        const double u = rng.uniform();
        const double v = std::copysign(1.0 - u * u, rng.uniform() - 0.5); // denser near +-1
        s.push_back(v);
        s.push_back(-v);
    }
    return s;
}

const std::vector<double> &pipeline_samples() {
    static const std::vector<double> s = [] {
        const auto g = build_pair_grid({-pi, pi}, pi / 32, make_ula(16));
        return ratio_training_samples(g, 300000, 61);
    }();
    return s;
}

} // namespace

TEST_CASE("uniform codebook examples") {
    const auto a = uniform_codebook({-1.0, 1.0}, 1);
    CHECK(a.codewords == std::vector<double>{-0.5, 0.5});
    const auto b = uniform_codebook({0.0, 4.0}, 2);
    CHECK(b.codewords == std::vector<double>{0.5, 1.5, 2.5, 3.5});
    CHECK_NOTHROW(b.validate());
    const auto c = uniform_codebook({-pi, pi}, 4);
    const double half = pi / 16;
    for (int i = 0; i <= 1000; ++i) {
        const double x = -pi + 2 * pi * i / 1000.0;
        CHECK(std::abs(x - quantize(x, c).codeword) <= half + 1e-12);
    }
    CHECK_THROWS_AS(uniform_codebook({1.0, 1.0}, 2), ConfigError);
    CHECK_THROWS_AS(uniform_codebook({0.0, 1.0}, 0), ConfigError);
}

TEST_CASE("quantize nearest codeword with lower-index ties") {
    const auto cb = uniform_codebook({0.0, 4.0}, 2);
    CHECK(quantize(1.5, cb).codeword == 1.5);
    CHECK(quantize(1.5, cb).index == 1);
    CHECK(quantize(2.0, cb).index == 1);
    CHECK(quantize(2.01, cb).index == 2);
    CHECK(quantize(-10.0, cb).index == 0);
    CHECK(quantize(10.0, cb).index == 3);
    for (double x : {-0.3, 0.7, 1.9, 3.2, 5.0}) {
        const double q = quantize(x, cb).codeword;
        CHECK(quantize(q, cb).codeword == q);
    }
}

TEST_CASE("codebook validation") {
    ScalarCodebook cb{{0.5, 0.1}, 1, {0.0, 1.0}};
    CHECK_THROWS_AS(cb.validate(), ContractError);
    cb.codewords = {0.1, 0.5, 0.7};
    CHECK_THROWS_AS(cb.validate(), ContractError);
    cb.codewords = {0.1, 1.5};
    CHECK_THROWS_AS(cb.validate(), ContractError);
}

TEST_CASE("training needs enough samples") {
    std::vector<double> few(399, 0.1);
    CHECK_THROWS_AS(train_ratio_codebook(few, 2), TrainingError);
    few.push_back(0.2);
    CHECK_NOTHROW(train_ratio_codebook(few, 2));
}

TEST_CASE("training on symmetric samples gives a symmetric codebook") {
    const auto s = symmetric_samples(20000, 62);
    for (unsigned bits = 1; bits <= 5; ++bits) {
        const auto cb = train_ratio_codebook(s, bits);
        CHECK_NOTHROW(cb.validate());
        const auto k = cb.size();
        for (std::size_t i = 0; i < k; ++i)
            CHECK(std::abs(cb.codewords[i] + cb.codewords[k - 1 - i]) < 1e-3);
    }
    const auto one = train_ratio_codebook(s, 1);
    CHECK(one.codewords[0] < 0.0);
    CHECK(one.codewords[0] == doctest::Approx(-one.codewords[1]).epsilon(1e-3));
}

TEST_CASE("Lloyd iterations never increase distortion") {
    TrainingReport rep;
    train_ratio_codebook(pipeline_samples(), 4, &rep);
    REQUIRE(rep.distortion.size() >= 2);
    for (std::size_t i = 1; i < rep.distortion.size(); ++i)
        CHECK(rep.distortion[i] <= rep.distortion[i - 1] * (1.0 + 1e-12));
    CHECK(rep.converged);
}

TEST_CASE("trained ratio codebook beats the uniform grid on pipeline samples") {
    const auto &s = pipeline_samples();
    for (unsigned bits = 1; bits <= 6; ++bits) {
        const auto trained = train_ratio_codebook(s, bits);
        const auto grid = uniform_codebook({-1.0, 1.0}, bits);
        CHECK(quantization_mse(s, trained) <= quantization_mse(s, grid));
    }
}

TEST_CASE("held-out MSE matches the training distortion") {
    TrainingReport rep;
    const auto cb = train_ratio_codebook(pipeline_samples(), 3, &rep);
    const auto g = build_pair_grid({-pi, pi}, pi / 32, make_ula(16));
    const auto fresh = ratio_training_samples(g, 300000, 63);
    const double mse = quantization_mse(fresh, cb);
    CHECK(std::abs(mse - rep.distortion.back()) < 0.02 * rep.distortion.back());
    CHECK_THROWS_AS(quantization_mse(std::vector<double>{}, cb), ContractError);
}
