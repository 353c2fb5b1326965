#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctmc_hums {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix is not a valid Q-matrix (negative off-diagonal or nonzero row sum).
class NonGeneratorError : public Error {
public:
    NonGeneratorError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A filter component became non-finite.
class NumericalBlowupError : public Error {
public:
    explicit NumericalBlowupError(std::size_t step)
        : Error("non-finite filter value at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// The filter assigns (numerically) no occupation time to a state, so its
/// row of the generator / entry of the slope vector is unidentifiable.
class DegenerateOccupationError : public Error {
public:
    DegenerateOccupationError(std::size_t row, double occupation)
        : Error("state " + std::to_string(row) + " has degenerate occupation " +
                std::to_string(occupation)),
          row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ZeroExposureError : public Error {
public:
    ZeroExposureError() : Error("survival sample has zero total exposure") {}
};

class DegenerateRegressionError : public Error {
public:
    DegenerateRegressionError() : Error("regression needs at least two distinct temperatures") {}
};

class SeriesTooShortError : public Error {
public:
    SeriesTooShortError(std::size_t length, std::size_t needed)
        : Error("series of length " + std::to_string(length) + " shorter than " +
                std::to_string(needed)) {}
};

/// Malformed data row; carries the file and 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ctmc_hums
