#pragma once
#include <stdexcept>
#include <string>

namespace lmg {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define LMG_DEFINE_ERROR(NAME)                                        \
    struct NAME : Error {                                             \
        explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
    }

LMG_DEFINE_ERROR(InvalidParams);
LMG_DEFINE_ERROR(DimensionMismatch);
LMG_DEFINE_ERROR(ConvergenceFailure);
LMG_DEFINE_ERROR(NormDrift);
LMG_DEFINE_ERROR(StepNotConverged);
LMG_DEFINE_ERROR(NoPeak);
LMG_DEFINE_ERROR(InsufficientPoints);
LMG_DEFINE_ERROR(NonPositiveValue);
LMG_DEFINE_ERROR(CrossoverRegime);
LMG_DEFINE_ERROR(NoBarrier);
LMG_DEFINE_ERROR(EnergyDrift);
LMG_DEFINE_ERROR(TraceDrift);
LMG_DEFINE_ERROR(PositivityViolation);
LMG_DEFINE_ERROR(ZeroVariance);
LMG_DEFINE_ERROR(ConfigError);

#undef LMG_DEFINE_ERROR

} // namespace lmg
