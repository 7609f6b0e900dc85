#ifndef ABP_QUANTIZER_HPP
#define ABP_QUANTIZER_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace abp {

struct Interval {
    double lo = -1.0;
    double hi = 1.0;
    bool operator==(const Interval &) const = default;
};

struct ScalarCodebook {
    std::vector<double> codewords; // strictly increasing, 2^bits entries
    unsigned bits = 1;
    Interval domain;

    std::size_t size() const noexcept { return codewords.size(); }
    void validate() const;
};

struct QuantizedValue {
    double codeword = 0.0;
    std::size_t index = 0;
};

struct TrainingReport {
    std::vector<double> distortion; // mean squared error after each partition step
    std::size_t iterations = 0;
    bool converged = false;
};

// Lloyd-Max on an empirical sample set, seeded with uniform quantiles.
// Stops at relative distortion change < 1e-9 or after 500 iterations.
ScalarCodebook train_ratio_codebook(std::span<const double> samples, unsigned bits, TrainingReport *report = nullptr,
                                    Interval domain = {-1.0, 1.0});

// Midpoints of a uniform partition of the domain
ScalarCodebook uniform_codebook(Interval domain, unsigned bits);

// Nearest codeword; a value exactly midway goes to the lower index
QuantizedValue quantize(double value, const ScalarCodebook &codebook);

double quantization_mse(std::span<const double> samples, const ScalarCodebook &codebook);

} // namespace abp

#endif
