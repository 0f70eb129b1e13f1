#pragma once

#include <stdexcept>
#include <string>

namespace macs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input text could not be parsed. line is 1-based.
struct ParseError : Error {
  ParseError(int line_, const std::string& what_)
      : Error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
  int line;
};

struct DisconnectedGraph : Error {
  explicit DisconnectedGraph(int components_)
      : Error("graph is disconnected (" + std::to_string(components_) +
              " components)"),
        components(components_) {}
  int components;
};

// Cholesky hit a nonpositive pivot. For shifted Laplacians this usually
// means the shift is not negative enough (or not negative at all).
struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(int column_)
      : Error("matrix is not positive definite (pivot at column " +
              std::to_string(column_) + ")"),
        column(column_) {}
  int column;
};

struct NoConvergence : Error {
  NoConvergence(int restarts_, double residual_)
      : Error("eigensolver failed to converge after " +
              std::to_string(restarts_) + " restarts (best residual " +
              std::to_string(residual_) + ")"),
        restarts(restarts_),
        residual(residual_) {}
  int restarts;
  double residual;
};

struct TooLarge : Error {
  using Error::Error;
};

struct NotSpanning : Error {
  using Error::Error;
};

struct InfeasibleBudget : Error {
  using Error::Error;
};

struct BudgetTooSmall : Error {
  using Error::Error;
};

struct BudgetMismatch : Error {
  using Error::Error;
};

struct ActiveSetOverflow : Error {
  using Error::Error;
};

}  // namespace macs
