#pragma once

#include <stdexcept>

namespace fairmit {

// Bad or malformed input data (score files, counts, record lists).
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration (config files, CLI options, incompatible settings).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values during training or evaluation.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fairmit
