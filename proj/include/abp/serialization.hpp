#ifndef ABP_SERIALIZATION_HPP
#define ABP_SERIALIZATION_HPP

#include "abp/abp_estimator.hpp"
#include "abp/beam_codebook.hpp"
#include "abp/channel_model.hpp"
#include "abp/quantizer.hpp"

#include <cstdint>
#include <string>

namespace abp {

// JSON round trips for replaying a trial. Only the generating parameters are
// stored; matrices are rebuilt on load.

std::string channel_to_json(const ChannelInstance &channel, std::uint64_t seed = 0);
ChannelInstance channel_from_json(const std::string &text);

std::string grid_to_json(const BeamPairGrid &grid);
BeamPairGrid grid_from_json(const std::string &text);

// Beam ids per probing matrix; weights are regenerated from the grids
std::string schedule_to_json(const ProbingSchedule &schedule);
ProbingSchedule schedule_from_json(const std::string &text, const BeamPairGrid &grid_tx, const BeamPairGrid &grid_rx);

std::string codebook_to_json(const ScalarCodebook &codebook);
ScalarCodebook codebook_from_json(const std::string &text);

// Export only
std::string trace_to_json(const SinglePathEstimate &estimate);
std::string trace_to_json(const MultipathEstimate &estimate);

} // namespace abp

#endif
