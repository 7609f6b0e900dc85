#ifndef ABP_ERRORS_HPP
#define ABP_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace abp {

// Invalid experiment or object configuration (bad sizes, empty ranges, ...).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a conversion.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Caller violated an interface contract (dimension mismatch, empty input).
class ContractError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Both beam powers of a pair were zero, the ratio is undefined.
class DegenerateMeasurement : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Codebook training could not run (e.g. too few samples).
class TrainingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A probing schedule did not contain every beam needed to resolve a pair.
class EstimationIncomplete : public std::runtime_error {
  public:
    EstimationIncomplete(const std::string &what, std::vector<int> tx_pairs, std::vector<int> rx_pairs)
        : std::runtime_error(what), missing_tx_pairs(std::move(tx_pairs)), missing_rx_pairs(std::move(rx_pairs)) {}

    std::vector<int> missing_tx_pairs;
    std::vector<int> missing_rx_pairs;
};

} // namespace abp

#endif
