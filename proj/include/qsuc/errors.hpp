#ifndef QSUC_ERRORS_HPP
#define QSUC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qsuc {

/// Bad parameter or malformed input data.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem exceeds a desk-scale guard (exhaustive search, dense operators).
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Remote sampler could not be reached.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Remote sampler answered with something we cannot parse.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reported energy disagrees with local recomputation.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver missed its tolerances within the iteration cap.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary encoding cannot represent a required value.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace qsuc

#endif  // QSUC_ERRORS_HPP
