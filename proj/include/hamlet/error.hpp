#pragma once

#include <stdexcept>
#include <string>

namespace hamlet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (CSV/JSON). The message carries the file and line.
class ParseError : public Error {
public:
    using Error::Error;
};

// Well-formed input whose values violate a domain invariant.
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid run or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace hamlet
