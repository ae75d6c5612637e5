#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stftpr {

enum class ErrorKind {
  dimension,
  configuration,
  invalid_window,
  invalid_partition,
  certification,
  non_retrievable,
  degenerate_edge,
  undefined_budget,
  invalid_prior,
  search_limit,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorKind::dimension, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::configuration, what) {}
};

class InvalidWindowError : public Error {
 public:
  explicit InvalidWindowError(const std::string& what)
      : Error(ErrorKind::invalid_window, what) {}
};

class InvalidPartitionError : public Error {
 public:
  explicit InvalidPartitionError(const std::string& what)
      : Error(ErrorKind::invalid_partition, what) {}
};

/// Raised when the window family fails the rank or supporting-length
/// hypotheses. `failing_m` lists the hop indices with rank-deficient
/// modulation matrices (empty when the failure is a length violation).
class CertificationError : public Error {
 public:
  CertificationError(const std::string& what, std::vector<int> failing_m = {})
      : Error(ErrorKind::certification, what), failing_m_(std::move(failing_m)) {}

  const std::vector<int>& failing_m() const noexcept { return failing_m_; }

 private:
  std::vector<int> failing_m_;
};

/// The support graph is disconnected; carries its components as sorted
/// vertex lists.
class NonRetrievableError : public Error {
 public:
  NonRetrievableError(const std::string& what,
                      std::vector<std::vector<int>> components)
      : Error(ErrorKind::non_retrievable, what),
        components_(std::move(components)) {}

  const std::vector<std::vector<int>>& components() const noexcept {
    return components_;
  }

 private:
  std::vector<std::vector<int>> components_;
};

class DegenerateEdgeError : public Error {
 public:
  DegenerateEdgeError(const std::string& what, int n, int n2)
      : Error(ErrorKind::degenerate_edge, what), n_(n), n2_(n2) {}

  int n() const noexcept { return n_; }
  int n2() const noexcept { return n2_; }

 private:
  int n_;
  int n2_;
};

class UndefinedBudgetError : public Error {
 public:
  explicit UndefinedBudgetError(const std::string& what)
      : Error(ErrorKind::undefined_budget, what) {}
};

class InvalidPriorError : public Error {
 public:
  explicit InvalidPriorError(const std::string& what)
      : Error(ErrorKind::invalid_prior, what) {}
};

class SearchLimitError : public Error {
 public:
  explicit SearchLimitError(const std::string& what)
      : Error(ErrorKind::search_limit, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error(ErrorKind::internal, what) {}
};

}  // namespace stftpr
