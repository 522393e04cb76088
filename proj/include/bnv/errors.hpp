#pragma once

#include <stdexcept>
#include <string>

namespace bnv {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (BIF, JSON, DIMACS). Carries a position when known.
struct ParseError : Error {
    ParseError(const std::string& msg, int line = -1, int column = -1)
        : Error(format(msg, line, column)), line(line), column(column) {}

    int line;
    int column;

  private:
    static std::string format(const std::string& msg, int line, int column) {
        if (line < 0) return msg;
        std::string s = msg + " (line " + std::to_string(line);
        if (column >= 0) s += ", column " + std::to_string(column);
        return s + ")";
    }
};

// Structurally well-formed input that violates a semantic invariant
// (cycle, missing CPT row, unnormalized row, bad outcome, ...).
struct SemanticError : Error {
    using Error::Error;
};

// Complete evidence with probability zero under the network.
struct ZeroEvidenceError : Error {
    using Error::Error;
};

// A configured resource budget (assignment count, solver conflicts) was hit.
// Never a silent wrong answer.
struct BudgetError : Error {
    using Error::Error;
};

// Bad argument to a library operation (unknown feature, tag collision, ...).
struct InvalidArgument : Error {
    using Error::Error;
};

}  // namespace bnv
