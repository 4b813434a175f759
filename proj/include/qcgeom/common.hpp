#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qcgeom {

// Points and integer cell coordinates in 2 or 3 dimensions, stored inline.
template <typename Scalar>
using VecN = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 3, 1>;

using Point = VecN<double>;
using Index = VecN<std::int64_t>;

enum class ErrorKind {
  Domain,
  Validation,
  Io,
  Quadrature,
  Underflow,
  Resolution,
  Unreachable,
  Precision,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

  // True for guards that trip on numerics or resolution rather than bad input.
  bool numeric_guard() const {
    return kind_ != ErrorKind::Domain && kind_ != ErrorKind::Validation && kind_ != ErrorKind::Io;
  }

 private:
  ErrorKind kind_;
};

#define QCGEOM_ERROR_TYPE(Name, Kind)                                       \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

QCGEOM_ERROR_TYPE(DomainError, Domain)
QCGEOM_ERROR_TYPE(ValidationError, Validation)
QCGEOM_ERROR_TYPE(IoError, Io)
QCGEOM_ERROR_TYPE(QuadratureError, Quadrature)
QCGEOM_ERROR_TYPE(UnderflowError, Underflow)
QCGEOM_ERROR_TYPE(ResolutionError, Resolution)
QCGEOM_ERROR_TYPE(UnreachableError, Unreachable)
QCGEOM_ERROR_TYPE(PrecisionError, Precision)

#undef QCGEOM_ERROR_TYPE

// Power of two 2^{-exponent}; exact for every exponent a double can hold.
struct Dyadic {
  int exponent = 0;
  double value() const;
  friend bool operator==(const Dyadic&, const Dyadic&) = default;
};

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

}  // namespace qcgeom
