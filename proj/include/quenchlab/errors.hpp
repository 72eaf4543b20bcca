#pragma once

#include <stdexcept>
#include <string>

namespace quenchlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char *kind() const noexcept { return "Error"; }
};

#define QUENCHLAB_DEFINE_ERROR(Name)                                           \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
    const char *kind() const noexcept override { return #Name; }               \
  };

QUENCHLAB_DEFINE_ERROR(InvalidArgument)
QUENCHLAB_DEFINE_ERROR(ConfigError)
QUENCHLAB_DEFINE_ERROR(IoError)
QUENCHLAB_DEFINE_ERROR(SingularAlpha)
QUENCHLAB_DEFINE_ERROR(ConsistencyError)
QUENCHLAB_DEFINE_ERROR(DegenerateInitial)
QUENCHLAB_DEFINE_ERROR(DivisionByZero)
QUENCHLAB_DEFINE_ERROR(BasisError)
QUENCHLAB_DEFINE_ERROR(CutoffExceeded)

#undef QUENCHLAB_DEFINE_ERROR

} // namespace quenchlab
