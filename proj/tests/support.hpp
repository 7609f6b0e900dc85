#ifndef ABP_TESTS_SUPPORT_HPP
#define ABP_TESTS_SUPPORT_HPP

#include "abp/beam_codebook.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace support {

inline int nearest_beam(const abp::BeamPairGrid &g, double f) {
    int best = 0;
    for (std::size_t k = 1; k < g.num_beams(); ++k)
        if (std::abs(abp::wrap_phase(g.beam_freqs[k].value - f)) <
            std::abs(abp::wrap_phase(g.beam_freqs[static_cast<std::size_t>(best)].value - f)))
            best = static_cast<int>(k);
    return best;
}

// First probing holds the beams nearest to `targets`; the rest tile the grid in order
inline std::vector<abp::ProbingMatrix> aligned_side(const abp::BeamPairGrid &g, const std::vector<double> &targets) {
    const std::size_t rf = targets.size();
    std::vector<int> first;
    for (double f : targets)
        first.push_back(nearest_beam(g, f));
    std::vector<int> rest;
    for (std::size_t k = 0; k < g.num_beams(); ++k)
        if (std::find(first.begin(), first.end(), static_cast<int>(k)) == first.end())
            rest.push_back(static_cast<int>(k));
    std::vector<abp::ProbingMatrix> out{abp::make_probing_matrix(g, first)};
    for (std::size_t i = 0; i < rest.size(); i += rf) {
        std::vector<int> ids(rest.begin() + static_cast<std::ptrdiff_t>(i),
                             rest.begin() + static_cast<std::ptrdiff_t>(std::min(rest.size(), i + rf)));
        for (int k = 0; ids.size() < rf; ++k)
            if (std::find(ids.begin(), ids.end(), rest[static_cast<std::size_t>(k)]) == ids.end())
                ids.push_back(rest[static_cast<std::size_t>(k)]);
        out.push_back(abp::make_probing_matrix(g, ids));
    }
    return out;
}

inline abp::ProbingSchedule aligned_schedule(const abp::BeamPairGrid &gt, const abp::BeamPairGrid &gr,
                                             const std::vector<double> &mu, const std::vector<double> &psi) {
    abp::ProbingSchedule s;
    s.tx_probings = aligned_side(gt, mu);
    s.rx_probings = aligned_side(gr, psi);
    return s;
}

} // namespace support

#endif
