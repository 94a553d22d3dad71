#pragma once

#include <stdexcept>
#include <string>

namespace dgdmn {

// Shape or layer-spec mismatch; message names the offending layer.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss or parameters during training; carries the phase/layer name.
struct TrainingDiverged : std::runtime_error {
    explicit TrainingDiverged(const std::string& phase, const std::string& msg)
        : std::runtime_error("training diverged in " + phase + ": " + msg), phase(phase) {}
    std::string phase;
};

struct IdxError : std::runtime_error {
    explicit IdxError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field(field) {}
    std::string field;
};

struct MetricError : std::runtime_error {
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace dgdmn
