#pragma once

#include <stdexcept>
#include <string>

namespace sprsim {

/// Base class for every error raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or manifest value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Violation of the message or hook ordering contract between ranks.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable physical state.
class PhysicsError : public Error {
 public:
  using Error::Error;
};

/// A particle gathered more neighbors than the configured maximum.
class NeighborOverflow : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

/// Malformed, truncated or incompatible checkpoint data.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace sprsim
