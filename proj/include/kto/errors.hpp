#pragma once

#include <stdexcept>
#include <string>

namespace kto {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define KTO_DEFINE_ERROR(Name)                  \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

// Data model
KTO_DEFINE_ERROR(DimensionMismatch);
KTO_DEFINE_ERROR(ShapeMismatch);
KTO_DEFINE_ERROR(NonFinite);
KTO_DEFINE_ERROR(LagTooLarge);
KTO_DEFINE_ERROR(InvalidArgument);

// File I/O
KTO_DEFINE_ERROR(ParseError);
KTO_DEFINE_ERROR(UnsupportedShape);
KTO_DEFINE_ERROR(IoFailure);

// Linear algebra / fitting
KTO_DEFINE_ERROR(SingularProblem);
KTO_DEFINE_ERROR(ConvergenceFailure);
KTO_DEFINE_ERROR(RankDeficient);
KTO_DEFINE_ERROR(FeatureDimensionTooLarge);

// Optimization
KTO_DEFINE_ERROR(NonFiniteObjective);

// Change-point detection
KTO_DEFINE_ERROR(EmptySeries);

// Synthetic generators
KTO_DEFINE_ERROR(Blowup);
KTO_DEFINE_ERROR(InvalidGeometry);

#undef KTO_DEFINE_ERROR

}  // namespace kto
