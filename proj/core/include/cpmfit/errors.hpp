#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "cpmfit/types.hpp"

namespace cpmfit {

// Base for every error raised by the library. Callers that only care about
// "something went wrong with the data" can catch this one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function (e.g. a mass flow
// beyond the choke point).
class DomainError : public Error {
public:
    using Error::Error;
};

// Collinear / duplicated points, singular scatter matrices.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// A coordinate range collapses to zero width.
class DegenerateSpanError : public Error {
public:
    using Error::Error;
};

class NoEllipseError : public Error {
public:
    using Error::Error;
};

class LengthMismatchError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Every truth value fell below the MAPE threshold. Distinct from a MAPE of 0.
class UndefinedMapeError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MissingHeaderError : public ParseError {
public:
    using ParseError::ParseError;
};

class DuplicateAbscissaError : public Error {
public:
    DuplicateAbscissaError(double speed, double m_dot);

    double speed() const noexcept { return speed_; }
    double m_dot() const noexcept { return m_dot_; }

private:
    double speed_;
    double m_dot_;
};

// Both local solvers produced a result that fails validation. Carries the
// best point seen so far for diagnostics.
class FitFailure : public Error {
public:
    FitFailure(const std::string& what, const BetaVector& best, double best_objective)
        : Error(what), best_(best), best_objective_(best_objective) {}

    const BetaVector& best() const noexcept { return best_; }
    double best_objective() const noexcept { return best_objective_; }

private:
    BetaVector best_;
    double best_objective_;
};

// The regressed beta is physically meaningless (ordering violated after
// constraint repair). Carries the raw polynomial values.
class InvalidPrediction : public Error {
public:
    InvalidPrediction(const std::string& what, const BetaVector& raw)
        : Error(what), raw_(raw) {}

    const BetaVector& raw() const noexcept { return raw_; }

private:
    BetaVector raw_;
};

}  // namespace cpmfit
