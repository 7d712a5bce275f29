#pragma once

#include <stdexcept>
#include <string>

namespace orgnav {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor dimensions do not line up for the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Out-of-range element or category index.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Non-finite value where a finite one is required (gradients, activations).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Misuse of a recording tape (for example a second backward pass).
class TapeError : public Error {
 public:
  using Error::Error;
};

// A scene template could not be satisfied.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// No path from the queried state to any successful termination.
class PlanningError : public Error {
 public:
  using Error::Error;
};

// Episode or training protocol violation (stepping a finished episode etc).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace orgnav
