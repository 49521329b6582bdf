#ifndef SPIKEQ_COMMON_HPP
#define SPIKEQ_COMMON_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace spikeq {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using BitVector = std::vector<std::uint8_t>;
using IndexVector = std::vector<int>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CorruptFileError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

/// Trellis too large for the configured MAP state budget.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Training loss became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Backward pass was asked to differentiate a tape recorded with different parameters.
class StaleTapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace spikeq

#endif  // SPIKEQ_COMMON_HPP
