#ifndef ABP_RANDOM_HPP
#define ABP_RANDOM_HPP

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

namespace abp {

// SplitMix64 finalizer. Bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derive a child key from a parent key and a path of counters, e.g.
// derive_seed(master, {stream, trial, slot}). Pure function of its inputs.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t key = splitmix64(parent);
    for (std::uint64_t c : path)
        key = splitmix64(key ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
    return key;
}

// Counter-based generator: output i is splitmix64(key + i * golden).
// Cheap to construct, so every slot / trial can own an independent stream.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return splitmix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    // Uniform in [0, 1) with 53 random bits
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n)
    std::uint64_t index(std::uint64_t n);

    // Circularly-symmetric complex Gaussian with E|z|^2 = variance
    std::complex<double> complex_normal(double variance = 1.0);

    // Unit-modulus complex number with uniform phase
    std::complex<double> unit_phase();

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Fisher-Yates with CounterRng::index, so results do not depend on the
// standard library's distribution implementations.
template <class T> void shuffle(std::vector<T> &v, CounterRng &rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.index(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace abp

#endif
