#pragma once

#include <stdexcept>
#include <string>

namespace qedk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config/IO problems carry the dotted path of the offending key so the CLI
// can print a one-line diagnostic and exit with status 2.
struct ConfigError : Error {
    std::string key;
    ConfigError(std::string key_, const std::string& what_)
        : Error(key_ + ": " + what_), key(std::move(key_)) {}
};

struct IoError : Error {
    using Error::Error;
};

struct IllConditioned : Error {
    using Error::Error;
};

struct PolesNotComputed : Error {
    using Error::Error;
};

struct ContourDivergence : Error {
    using Error::Error;
};

struct PoleOnAxis : Error {
    using Error::Error;
};

struct NotDissipative : Error {
    using Error::Error;
};

struct NotAbsorptive : Error {
    using Error::Error;
};

struct GridTooCoarse : Error {
    using Error::Error;
};

struct NonIntegrableKernel : Error {
    using Error::Error;
};

struct ConvolutionUnderresolved : Error {
    using Error::Error;
};

} // namespace qedk
