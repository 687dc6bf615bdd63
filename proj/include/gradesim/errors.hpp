#pragma once

#include <stdexcept>
#include <string>

namespace gradesim {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GRADESIM_DEFINE_ERROR(Name) \
  class Name : public Error {       \
   public:                          \
    using Error::Error;             \
  }

GRADESIM_DEFINE_ERROR(GimbalLock);
GRADESIM_DEFINE_ERROR(DegenerateRotation);
GRADESIM_DEFINE_ERROR(DegenerateLeg);
GRADESIM_DEFINE_ERROR(NonUniformSampling);
GRADESIM_DEFINE_ERROR(NumericalDivergence);
GRADESIM_DEFINE_ERROR(SingularInnovation);
GRADESIM_DEFINE_ERROR(StreamMisaligned);
GRADESIM_DEFINE_ERROR(PlacementFailure);
GRADESIM_DEFINE_ERROR(OutOfBounds);
GRADESIM_DEFINE_ERROR(MismatchedEnv);
GRADESIM_DEFINE_ERROR(IoError);

#undef GRADESIM_DEFINE_ERROR

// Configuration error carrying the offending key path, e.g. "noise.ic.position_cm".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gradesim
