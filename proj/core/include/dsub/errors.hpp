#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace dsub {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization failed on a matrix expected to be SPD.
class NotSpd : public Error {
 public:
  using Error::Error;
};

/// Gram matrix of a coefficient matrix is singular or too ill-conditioned
/// to invert without diagonal loading.
class SingularGram : public Error {
 public:
  explicit SingularGram(const std::string& what, std::optional<std::size_t> node = {})
      : Error(what), node_(node) {}
  /// Node whose local coefficients were rejected, when known.
  [[nodiscard]] std::optional<std::size_t> node() const noexcept { return node_; }

 private:
  std::optional<std::size_t> node_;
};

class DisconnectedGraph : public Error {
 public:
  using Error::Error;
};

class InvalidNodeIndex : public Error {
 public:
  using Error::Error;
};

class NotANeighbor : public Error {
 public:
  using Error::Error;
};

class InvalidRank : public Error {
 public:
  using Error::Error;
};

class NeighborhoodTooSmall : public Error {
 public:
  NeighborhoodTooSmall(const std::string& what, std::size_t node) : Error(what), node_(node) {}
  [[nodiscard]] std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

/// An estimate became non-finite or exceeded the runaway bound.
class DivergenceDetected : public Error {
 public:
  DivergenceDetected(const std::string& what, std::size_t node)
      : Error(what), node_(node) {}
  DivergenceDetected(const std::string& what, std::string algorithm, std::size_t run,
                     std::size_t iteration, std::size_t node)
      : Error(what),
        node_(node),
        algorithm_(std::move(algorithm)),
        run_(run),
        iteration_(iteration) {}

  [[nodiscard]] std::size_t node() const noexcept { return node_; }
  [[nodiscard]] const std::string& algorithm() const noexcept { return algorithm_; }
  [[nodiscard]] std::optional<std::size_t> run() const noexcept { return run_; }
  [[nodiscard]] std::optional<std::size_t> iteration() const noexcept { return iteration_; }

 private:
  std::size_t node_;
  std::string algorithm_;
  std::optional<std::size_t> run_;
  std::optional<std::size_t> iteration_;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class WindowTooLarge : public Error {
 public:
  using Error::Error;
};

/// Traces passed to averaging were not in ascending run order.
class OrderViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario dump or edge-list file.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsub
