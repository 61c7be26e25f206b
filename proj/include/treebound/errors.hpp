#pragma once

#include <stdexcept>
#include <string>

namespace treebound {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A requested tree is too large for the vertex index type.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A vertex id does not belong to the tree.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Two vertices map to the same point, so pair ratios collapse to zero.
class DegenerateEmbedding : public Error {
 public:
  using Error::Error;
};

/// The tree has no vertex pair to measure (depth 0).
class NoPairs : public Error {
 public:
  using Error::Error;
};

/// A grandchild selection is malformed or incomplete.
class SelectionError : public Error {
 public:
  using Error::Error;
};

/// The operation has no analytic form for these parameters.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// A numeric search exhausted its budget without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// No positive constant satisfies the requested margin.
class InfeasibleMargin : public Error {
 public:
  using Error::Error;
};

/// A precondition of the geometric argument does not hold for the input.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// An inequality that is guaranteed by the theory failed; this signals a bug
/// or an invalid convexity profile, never an expected runtime condition.
class LemmaViolation : public Error {
 public:
  using Error::Error;
};

/// The tree is too shallow for the requested extraction.
class DepthError : public Error {
 public:
  using Error::Error;
};

}  // namespace treebound
