#pragma once

#include <stdexcept>
#include <string>

namespace emorl {

// Base for all errors raised by the library. CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A non-neutral label was queried for a wheel angle it does not have.
class MissingPlacement : public Error {
 public:
  using Error::Error;
};

// Wheel-angle query on a neutral label; neutral sits off the wheel.
class NeutralAngleQuery : public Error {
 public:
  using Error::Error;
};

// A label name is not part of the matrix / label set in use.
class LabelNotInSet : public Error {
 public:
  using Error::Error;
};

// Alpha schedule with zero total steps or other unusable parameters.
class InvalidSchedule : public Error {
 public:
  using Error::Error;
};

// A loss or gradient intermediate became NaN/inf.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

// Gold label of a prediction record is outside the label set.
class UnknownGoldLabel : public Error {
 public:
  using Error::Error;
};

// Metrics requested on a confusion matrix with zero records.
class EmptyMatrix : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent configuration (unknown keys, bad ranges, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace emorl
