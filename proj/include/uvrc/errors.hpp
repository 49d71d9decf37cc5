#pragma once

#include <stdexcept>
#include <string>

namespace uvrc {

// CLI exit codes. 1 is reserved for unexpected internal failures.
enum ExitCode : int {
  kExitOk = 0,
  kExitBadArgs = 2,
  kExitCorruptStream = 3,
  kExitModelMismatch = 4,
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller passed something that violates a precondition (bad shapes, bad
// ranges, unsupported architecture, missing files).
struct InvalidArgument : Error {
  using Error::Error;
};

// A bitstream failed validation: bad magic, truncated payload, checksum
// mismatch, undecodable symbols.
struct CorruptStream : Error {
  using Error::Error;
};

// A bitstream was produced by a different model than the one supplied.
struct ModelMismatch : Error {
  using Error::Error;
};

// A forward/backward pass produced non-finite values.
struct NumericalError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace uvrc
