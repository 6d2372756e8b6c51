#pragma once

#include <stdexcept>
#include <string>

namespace mtgcd {

// Scene sampling / projection failures. Callers typically resample.
struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Label derivation hit inconsistent instance data.
struct LabelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Vector-field category codec misuse (category outside table range).
struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or internally inconsistent configuration, including shape mismatches
// between a config and the tensors flowing through the model.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite value where a finite one is required (loss terms, schedules).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric accumulation over incompatible rasters.
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / codec failures, always carrying the offending path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mtgcd
