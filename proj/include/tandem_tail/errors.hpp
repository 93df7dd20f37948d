// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tandem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// A stability inequality does not hold; the message names it.
class UnstableModel : public Error {
public:
    using Error::Error;
};

/// c2 - lambda2 - c1 == 0, so the geometric ratio k1 is undefined.
class DegenerateK1 : public Error {
public:
    using Error::Error;
};

/// The model was validated in weak mode with a parameter relationship the
/// kernel pipeline does not cover.
class UnsupportedModel : public Error {
public:
    using Error::Error;
};

/// A branch was requested where the discriminant is negative.
class OutsideBranchCut : public Error {
public:
    using Error::Error;
};

class EmptyWindow : public Error {
public:
    using Error::Error;
};

class InsufficientTail : public Error {
public:
    using Error::Error;
};

class InsufficientBlocks : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

/// Config file problem, carrying the offending line (0 when unknown) and field.
class ConfigError : public Error {
public:
    ConfigError(int line, std::string field, const std::string& what)
        : Error(format(line, field, what)), line_(line), field_(std::move(field)) {}

    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(int line, const std::string& field, const std::string& what) {
        std::string out = "config";
        if (line > 0) out += ":" + std::to_string(line);
        if (!field.empty()) out += ": field '" + field + "'";
        return out + ": " + what;
    }

    int line_;
    std::string field_;
};

}  // namespace tandem
