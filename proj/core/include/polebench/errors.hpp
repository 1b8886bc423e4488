#pragma once

#include <stdexcept>

namespace polebench {

/// Base class for all polebench error conditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// signal
class EmptyAfterSimplification : public Error {
 public:
  using Error::Error;
};
class UnstablePole : public Error {
 public:
  using Error::Error;
};

// recovery
class ZeroLeadingSample : public Error {
 public:
  using Error::Error;
};
class DuplicatePoles : public Error {
 public:
  using Error::Error;
};
class RankDeficient : public Error {
 public:
  using Error::Error;
};

// landscape
class UnstableCandidate : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class NonFiniteValue : public Error {
 public:
  using Error::Error;
};
class IdentityPermutation : public Error {
 public:
  using Error::Error;
};
class NotPSD : public Error {
 public:
  using Error::Error;
};
// Raised when an equalization-ratio objective would divide by a frequency
// response that vanishes somewhere on the quadrature grid.
class ZeroFrequencyResponse : public Error {
 public:
  using Error::Error;
};

// rnn
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

// esn
class PoleOutsideUnitCircle : public Error {
 public:
  using Error::Error;
};
class UnpairedComplexPole : public Error {
 public:
  using Error::Error;
};
class DegenerateDraw : public Error {
 public:
  using Error::Error;
};

}  // namespace polebench
