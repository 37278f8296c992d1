#pragma once

/// @file errors.hpp
/// @brief Exception hierarchy shared by all cucumber modules.
///
/// Two families matter to callers: ConfigError (bad parameters supplied by
/// the user) and DataError (input files or series that violate their
/// contracts). The CLI maps them to distinct exit codes.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace cucumber {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

/// Alpha outside the open interval (0, 1).
class InvalidAlpha : public ConfigError {
public:
    explicit InvalidAlpha(double alpha)
        : ConfigError("alpha must lie in (0, 1), got " + std::to_string(alpha))
        , alpha_(alpha) {}

    [[nodiscard]] double alpha() const noexcept { return alpha_; }

private:
    double alpha_;
};

/// Requested quantile is not one of the levels stored in a Quantiles series.
class QuantileUnavailable : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class InvalidUtilization : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class InvalidProfile : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class GridMismatch : public DataError {
public:
    using DataError::DataError;
};

class RepresentationMismatch : public DataError {
public:
    using DataError::DataError;
};

class ManifestError : public DataError {
public:
    using DataError::DataError;
};

/// Malformed input text. Row and column are 1-based when known.
class ParseError : public DataError {
public:
    ParseError(std::string source, std::optional<std::size_t> row, std::optional<std::size_t> column,
               const std::string& what)
        : DataError(format(source, row, column, what))
        , source_(std::move(source))
        , row_(row)
        , column_(column) {}

    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] std::optional<std::size_t> row() const noexcept { return row_; }
    [[nodiscard]] std::optional<std::size_t> column() const noexcept { return column_; }

private:
    static std::string format(const std::string& source, std::optional<std::size_t> row,
                              std::optional<std::size_t> column, const std::string& what) {
        std::string msg = source;
        if (row) {
            msg += ":" + std::to_string(*row);
        }
        if (column) {
            msg += ":" + std::to_string(*column);
        }
        return msg + ": " + what;
    }

    std::string source_;
    std::optional<std::size_t> row_;
    std::optional<std::size_t> column_;
};

/// Well-formed input whose values break a series invariant (negative power,
/// crossing quantiles, ...). `step` is the zero-based step index.
class InvariantViolation : public DataError {
public:
    InvariantViolation(std::size_t step, const std::string& what)
        : DataError("step " + std::to_string(step) + ": " + what)
        , step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

} // namespace cucumber
