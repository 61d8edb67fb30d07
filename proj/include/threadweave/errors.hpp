#pragma once

#include <stdexcept>
#include <string>

namespace tw {

// Error categories map onto CLI exit codes: UsageError -> 1, DataError -> 2,
// NumericError -> 3. Library code throws; only main() translates.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tw
