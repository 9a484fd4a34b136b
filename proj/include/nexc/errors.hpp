#pragma once

#include <stdexcept>
#include <string>

namespace nexc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyTrainingSet : Error {
    using Error::Error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct NegativeInput : Error {
    using Error::Error;
};
struct DegenerateCovariance : Error {
    using Error::Error;
};
struct UnknownLabel : Error {
    using Error::Error;
};
struct DegenerateSplit : Error {
    using Error::Error;
};
struct IdMismatch : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

} // namespace nexc
