#pragma once

#include <stdexcept>
#include <string>

namespace gait {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Cloud cannot support cylinder fitting (< 2 points, flat in z, or all
// points on the axis).
struct DegenerateCloud : Error {
    using Error::Error;
};

// All raw histogram counts are zero.
struct EmptyHistogram : Error {
    using Error::Error;
};

// Vector/matrix dimensions do not match the expected network shapes.
struct ShapeMismatch : Error {
    using Error::Error;
};

// Training requested on an empty dataset.
struct EmptyDataset : Error {
    using Error::Error;
};

// Loss history is shorter than the requested stable window.
struct HistoryTooShort : Error {
    using Error::Error;
};

// ROC metrics need at least one sample of each class.
struct SingleClass : Error {
    using Error::Error;
};

struct EmptySequence : Error {
    using Error::Error;
};

// Segment length exceeds the sequence length.
struct SegmentTooLong : Error {
    using Error::Error;
};

// A masked-in measure has zero training mean, so its weight is undefined.
struct ZeroMeanMeasure : Error {
    using Error::Error;
};

// Invalid generator or run parameters.
struct InvalidParams : Error {
    using Error::Error;
};

// File could not be read/written.
struct IoError : Error {
    using Error::Error;
};

// Bad magic bytes, unsupported version, or malformed file contents.
struct FormatError : Error {
    using Error::Error;
};

// Non-finite value encountered where the pipeline requires finite numbers.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace gait
