#include "abp/quantizer.hpp"
#include "abp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace abp {

namespace {

constexpr unsigned max_bits = 16;
constexpr std::size_t max_iterations = 500;
constexpr double rel_tol = 1e-9;

void check_bits(unsigned bits) {
    if (bits < 1 || bits > max_bits)
        throw ConfigError("codebook bits must be in [1, 16], got " + std::to_string(bits));
}

} // namespace

void ScalarCodebook::validate() const {
    check_bits(bits);
    if (codewords.size() != (std::size_t{1} << bits))
        throw ContractError("ScalarCodebook: expected 2^bits codewords");
    if (!(domain.lo < domain.hi))
        throw ContractError("ScalarCodebook: empty domain");
    for (std::size_t i = 0; i < codewords.size(); ++i) {
        if (codewords[i] < domain.lo || codewords[i] > domain.hi)
            throw ContractError("ScalarCodebook: codeword outside domain");
        if (i > 0 && !(codewords[i] > codewords[i - 1]))
            throw ContractError("ScalarCodebook: codewords must be strictly increasing");
    }
}

ScalarCodebook uniform_codebook(Interval domain, unsigned bits) {
    check_bits(bits);
    if (!(domain.lo < domain.hi))
        throw ConfigError("uniform_codebook: empty domain");
    const std::size_t k = std::size_t{1} << bits;
    const double w = (domain.hi - domain.lo) / static_cast<double>(k);
    ScalarCodebook cb{{}, bits, domain};
    cb.codewords.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        cb.codewords.push_back(domain.lo + (static_cast<double>(i) + 0.5) * w);
    return cb;
}

QuantizedValue quantize(double value, const ScalarCodebook &codebook) {
    const auto &c = codebook.codewords;
    if (c.empty())
        throw ContractError("quantize: empty codebook");
    const auto it = std::lower_bound(c.begin(), c.end(), value);
    std::size_t idx = static_cast<std::size_t>(it - c.begin());
    if (idx == c.size())
        idx = c.size() - 1;
    else if (idx > 0 && value - c[idx - 1] <= c[idx] - value)
        --idx;
    return {c[idx], idx};
}

double quantization_mse(std::span<const double> samples, const ScalarCodebook &codebook) {
    if (samples.empty())
        throw ContractError("quantization_mse: no samples");
    double acc = 0.0;
    for (double x : samples) {
        const double e = x - quantize(x, codebook).codeword;
        acc += e * e;
    }
    return acc / static_cast<double>(samples.size());
}

ScalarCodebook train_ratio_codebook(std::span<const double> samples, unsigned bits, TrainingReport *report,
                                    Interval domain) {
    check_bits(bits);
    const std::size_t k = std::size_t{1} << bits;
    if (samples.size() < 100 * k)
        throw TrainingError("train_ratio_codebook: need at least 100 * 2^bits samples, got " +
                            std::to_string(samples.size()));
    if (!(domain.lo < domain.hi))
        throw ConfigError("train_ratio_codebook: empty domain");

    std::vector<double> x(samples.begin(), samples.end());
    for (double &v : x) {
        if (!std::isfinite(v))
            throw TrainingError("train_ratio_codebook: non-finite sample");
        v = std::clamp(v, domain.lo, domain.hi);
    }
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + x[i];
        s2[i + 1] = s2[i] + x[i] * x[i];
    }

    std::vector<double> c(k);
    for (std::size_t i = 0; i < k; ++i)
        c[i] = x[std::min(n - 1, static_cast<std::size_t>((static_cast<double>(i) + 0.5) * static_cast<double>(n) /
                                                          static_cast<double>(k)))];
    for (std::size_t i = 1; i < k; ++i) // heavy ties in the samples can collapse quantiles
        if (!(c[i] > c[i - 1]))
            c[i] = c[i - 1] + 1e-12 * (1.0 + std::abs(c[i - 1]));

    std::vector<std::size_t> edge(k + 1);
    TrainingReport rep;
    double prev = 0.0;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        // partition: samples <= midpoint belong to the lower cell
        edge[0] = 0;
        edge[k] = n;
        for (std::size_t i = 1; i < k; ++i) {
            const double t = 0.5 * (c[i - 1] + c[i]);
            edge[i] = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
        }
        double d = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double cnt = static_cast<double>(edge[i + 1] - edge[i]);
            const double a1 = s1[edge[i + 1]] - s1[edge[i]];
            const double a2 = s2[edge[i + 1]] - s2[edge[i]];
            d += a2 - 2.0 * c[i] * a1 + cnt * c[i] * c[i];
        }
        d = std::max(0.0, d / static_cast<double>(n));
        if (it > 0 && d > prev * (1.0 + 1e-10) + 1e-15)
            throw TrainingError("train_ratio_codebook: distortion increased during Lloyd iteration");
        rep.distortion.push_back(d);
        rep.iterations = it + 1;
        if (it > 0 && (prev - d) <= rel_tol * prev) {
            rep.converged = true;
            break;
        }
        prev = d;
        // centroid update; empty cells keep their codeword
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t cnt = edge[i + 1] - edge[i];
            if (cnt > 0)
                c[i] = (s1[edge[i + 1]] - s1[edge[i]]) / static_cast<double>(cnt);
        }
    }

    ScalarCodebook cb{std::move(c), bits, domain};
    for (double &v : cb.codewords)
        v = std::clamp(v, domain.lo, domain.hi);
    if (report)
        *report = std::move(rep);
    return cb;
}

} // namespace abp
