#pragma once

#include <stdexcept>
#include <string>

namespace katlas {

enum class ErrorKind {
  Precondition,
  NoPositiveZero,
  IntegratorFailure,
  Inconclusive,
  BracketNotFound,
  NoConvergence,
  TailTooShort,
  NotApplicable,
  DegenerateRequiresA,
  OutOfRange,
  ContinuumCase,
  NotOnContinuum,
  EmptyAtlas,
  OutOfRegime,
  Io,
  Parse,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace katlas
