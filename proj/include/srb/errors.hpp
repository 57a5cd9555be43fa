#pragma once

#include <stdexcept>
#include <string>

namespace srb {

// Bad command line or config file. CLI maps this to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or missing corpus files, vocab files, checkpoints. Exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values, degenerate vectors, numeric contract violations. Exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace srb
