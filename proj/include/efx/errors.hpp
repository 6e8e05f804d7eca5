#pragma once

#include <stdexcept>
#include <string>

namespace efx {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Instance/descriptor data violates the documented schema or invariants.
struct MalformedInstanceError : Error {
  using Error::Error;
};

/// A valuation that cannot be given a non-degenerate cancelable ordering
/// (e.g. a degenerate table valuation with no usable proxy).
struct UnsupportedValuationError : Error {
  using Error::Error;
};

/// Input exceeds a hard size cap (items, exhaustive-check range, ...).
struct CapacityError : Error {
  using Error::Error;
};

/// Caller passed arguments outside an operation's contract.
struct ArgumentError : Error {
  using Error::Error;
};

/// An operation's stated precondition does not hold.
struct PreconditionError : Error {
  using Error::Error;
};

/// A property that is a theorem of the underlying machinery failed at
/// runtime. Surfaced loudly: if one of these fires, the run found a bug,
/// not a bad input.
struct InvariantViolationError : Error {
  using Error::Error;
};

/// Oracle enumeration exceeded its configured budget.
struct BudgetExceededError : Error {
  using Error::Error;
};

}  // namespace efx
