#pragma once

#include <stdexcept>
#include <string>

namespace fedtrial {

// Base class for all errors raised by the library. The CLI maps
// ConfigError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration: bad dimensions, bad fractions, unknown config keys,
// missing input paths, overlapping code sets.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Tensor/vector dimension mismatches, mixed encodings in one batch.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Token index outside the vocabulary index space.
class EncodingError : public Error {
public:
    using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
public:
    using Error::Error;
};

// Empty cohorts, malformed data files, all clients skipped.
class DataError : public Error {
public:
    using Error::Error;
};

// Incompatible client updates in one aggregation round.
class AggregationError : public Error {
public:
    using Error::Error;
};

// Undefined metrics (e.g. single-class AUC input).
class MetricError : public Error {
public:
    using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace fedtrial
