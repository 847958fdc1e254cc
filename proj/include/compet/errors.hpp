#pragma once

#include <stdexcept>
#include <string>

namespace compet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct NoStabilizingSolution : Error {
    using Error::Error;
};
struct UnstableCoefficient : Error {
    using Error::Error;
};
struct UnstableProduct : Error {
    using Error::Error;
};
struct NotPsd : Error {
    using Error::Error;
};
struct NotPd : Error {
    using Error::Error;
};
struct Singular : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct RankDeficientBw : Error {
    using Error::Error;
};
struct RankDeficientM : Error {
    using Error::Error;
};
struct RiccatiFailure : Error {
    using Error::Error;
};
struct UnsupportedWeight : Error {
    using Error::Error;
};
struct FileExhausted : Error {
    using Error::Error;
};
struct UnstableLoop : Error {
    using Error::Error;
};
struct NonFiniteState : Error {
    using Error::Error;
};
struct InfeasibleAtUpperBound : Error {
    using Error::Error;
};
struct EigOnCircle : Error {
    using Error::Error;
};

} // namespace compet
