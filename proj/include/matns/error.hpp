#pragma once

#include <stdexcept>
#include <string>

namespace matns {

// Broad failure classes. The CLI maps them to exit codes 2, 3 and 4.
enum class ErrorClass { Config, Data, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), cls_(cls), kind_(std::move(kind)) {}

  ErrorClass error_class() const noexcept { return cls_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorClass cls_;
  std::string kind_;
};

#define MATNS_DEFINE_ERROR(Name, Cls)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(Cls, #Name, what) {} \
  };

MATNS_DEFINE_ERROR(InvalidArgument, ErrorClass::Config)
MATNS_DEFINE_ERROR(InvalidDimension, ErrorClass::Config)
MATNS_DEFINE_ERROR(InsufficientSamples, ErrorClass::Config)
MATNS_DEFINE_ERROR(DimensionMismatch, ErrorClass::Data)
MATNS_DEFINE_ERROR(ShapeMismatch, ErrorClass::Data)
MATNS_DEFINE_ERROR(FormatError, ErrorClass::Data)
MATNS_DEFINE_ERROR(ZeroVariance, ErrorClass::Data)
MATNS_DEFINE_ERROR(ZeroDiagonal, ErrorClass::Data)
MATNS_DEFINE_ERROR(NotSymmetric, ErrorClass::Data)
MATNS_DEFINE_ERROR(TargetUnreachable, ErrorClass::Numerical)
MATNS_DEFINE_ERROR(NotPositiveDefinite, ErrorClass::Numerical)
MATNS_DEFINE_ERROR(NonConvergence, ErrorClass::Numerical)
MATNS_DEFINE_ERROR(NonFiniteEncountered, ErrorClass::Numerical)
MATNS_DEFINE_ERROR(SingularInput, ErrorClass::Numerical)
MATNS_DEFINE_ERROR(EmptyGraph, ErrorClass::Numerical)

#undef MATNS_DEFINE_ERROR

}  // namespace matns
