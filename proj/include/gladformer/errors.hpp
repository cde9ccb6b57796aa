#pragma once

#include <stdexcept>
#include <string>

namespace gladformer {

// Dataset file could not be found or opened.
struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dataset file exists but its contents are malformed.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller-supplied argument is out of range.
struct ArgError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Tensor shapes are incompatible for the requested operation.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A dense eigendecomposition was requested above the configured size cap.
struct OracleCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric undefined for the given inputs (e.g. AUC with a single class).
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An internal precondition was violated by the caller.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Training diverged; carries the epoch at which it happened.
struct TrainError : std::runtime_error {
    TrainError(const std::string& msg, int epoch_)
        : std::runtime_error(msg + " (epoch " + std::to_string(epoch_) + ")"), epoch(epoch_) {}
    int epoch;
};

}  // namespace gladformer
