#pragma once

#include <stdexcept>
#include <string>

namespace vegspots {

// Every failure raised by the library derives from Error so callers can
// catch the whole family at the CLI boundary and map it to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define VEGSPOTS_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

VEGSPOTS_DEFINE_ERROR(InvalidParams);
VEGSPOTS_DEFINE_ERROR(OutOfValidity);
VEGSPOTS_DEFINE_ERROR(NoTuringPoint);
VEGSPOTS_DEFINE_ERROR(NoOnsetFound);
VEGSPOTS_DEFINE_ERROR(DomainError);
VEGSPOTS_DEFINE_ERROR(ShootingFailed);
VEGSPOTS_DEFINE_ERROR(NoGroundState);
VEGSPOTS_DEFINE_ERROR(FamilyUnavailable);
VEGSPOTS_DEFINE_ERROR(BadGrid);
VEGSPOTS_DEFINE_ERROR(DimensionMismatch);
VEGSPOTS_DEFINE_ERROR(LinearSolveFailure);
VEGSPOTS_DEFINE_ERROR(MissingLandmarks);
VEGSPOTS_DEFINE_ERROR(NoApproach);
VEGSPOTS_DEFINE_ERROR(EigenFailure);
VEGSPOTS_DEFINE_ERROR(ConfigError);
VEGSPOTS_DEFINE_ERROR(SeedFailure);

#undef VEGSPOTS_DEFINE_ERROR

}  // namespace vegspots
