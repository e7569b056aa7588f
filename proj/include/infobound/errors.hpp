#pragma once

#include <stdexcept>
#include <string>

namespace infobound {

class error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent inputs (bad pmf, mismatched dimensions, bad config).
class validation_error : public error {
  using error::error;
};

// Enumeration or memory budget exceeded.
class resource_error : public error {
  using error::error;
};

// A mathematical invariant that should hold by theorem failed numerically.
class invariant_error : public error {
  using error::error;
};

class io_error : public error {
  using error::error;
};

}  // namespace infobound
