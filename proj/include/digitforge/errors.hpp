#ifndef DIGITFORGE_ERRORS_HPP
#define DIGITFORGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace digitforge {

/// Root of every exception thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (bad digit, x outside I, ...).
class domain_error : public error {
 public:
  using error::error;
};

/// A point of the endpoint set D was hit; D is Lebesgue-null, so the caller decides what to do.
class endpoint_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// Operation needs a cell of positive length.
class empty_cell_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// Conditioning on an event of probability zero.
class conditioning_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// The scheme or density does not support the requested operation.
class unsupported_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// The chain has no unique invariant law (reducible transition matrix).
class reducible_error : public domain_error {
 public:
  using domain_error::domain_error;
};

/// A resource cap (depth cap, block budget) was exceeded.
class budget_error : public error {
 public:
  using error::error;
};

/// Exact enumeration would be too large; use the Monte Carlo route.
class infeasible_exact_error : public error {
 public:
  using error::error;
};

}  // namespace digitforge

#endif  // DIGITFORGE_ERRORS_HPP
