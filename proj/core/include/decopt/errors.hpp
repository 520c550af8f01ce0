#pragma once

#include <stdexcept>
#include <string>

namespace decopt {

// Base class for all library errors. Configuration problems (bad input data,
// malformed files, invalid parameters) derive from ConfigError; failures that
// occur while an algorithm is executing derive from RuntimeError. The CLI maps
// the two branches to distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class RuntimeError : public Error {
 public:
  using Error::Error;
};

class DisconnectedGraphError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class SelfLoopError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IndexOutOfRangeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidParameterError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ShapeMismatchError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InfeasibleError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A user callback produced NaN or Inf. The message names the offending node.
class NonFiniteValueError : public RuntimeError {
 public:
  NonFiniteValueError(int node, const std::string& what_part)
      : RuntimeError("non-finite value from node " + std::to_string(node) +
                     " while evaluating " + what_part),
        node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

// A node tried to use a neighbor value that was never delivered.
class MissingNeighborMessageError : public RuntimeError {
 public:
  MissingNeighborMessageError(int node, int neighbor, int round,
                              const std::string& what_part)
      : RuntimeError("node " + std::to_string(node) + " is missing " + what_part +
                     " from neighbor " + std::to_string(neighbor) + " in round " +
                     std::to_string(round)),
        node_(node),
        neighbor_(neighbor),
        round_(round) {}
  int node() const { return node_; }
  int neighbor() const { return neighbor_; }
  int round() const { return round_; }

 private:
  int node_;
  int neighbor_;
  int round_;
};

// A node requested state of a non-neighbor through the simulator.
class LocalityViolationError : public RuntimeError {
 public:
  LocalityViolationError(int requester, int target)
      : RuntimeError("node " + std::to_string(requester) +
                     " requested state of non-neighbor " + std::to_string(target)),
        requester_(requester),
        target_(target) {}
  int requester() const { return requester_; }
  int target() const { return target_; }

 private:
  int requester_;
  int target_;
};

}  // namespace decopt
