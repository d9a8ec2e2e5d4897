#pragma once

#include <stdexcept>
#include <string>

namespace conelab {

// One exception type per failure mode so callers can react selectively.
#define CONELAB_ERROR(Name)                               \
    class Name : public std::runtime_error {              \
    public:                                               \
        using std::runtime_error::runtime_error;          \
    }

CONELAB_ERROR(SingularEvaluation);
CONELAB_ERROR(NotOnSingularSet);
CONELAB_ERROR(RankDeficient);
CONELAB_ERROR(DimensionMismatch);
CONELAB_ERROR(ZeroShapeOperator);
CONELAB_ERROR(StepSizeUnderflow);
CONELAB_ERROR(LeftManifold);
CONELAB_ERROR(SeedInsideSingularTol);
CONELAB_ERROR(WindowContainsEvent);
CONELAB_ERROR(NotABranchRoot);
CONELAB_ERROR(ProfileClipped);
CONELAB_ERROR(BoundaryMassExceeded);
CONELAB_ERROR(HessianUndefined);
CONELAB_ERROR(SchemeInfeasible);
CONELAB_ERROR(ScaleOrderViolation);
CONELAB_ERROR(ConfigError);

#undef CONELAB_ERROR

}  // namespace conelab
