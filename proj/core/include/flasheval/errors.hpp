#pragma once

#include <stdexcept>

namespace flasheval {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FLASHEVAL_DEFINE_ERROR(name)      \
  class name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

FLASHEVAL_DEFINE_ERROR(ParseError);           // malformed input file
FLASHEVAL_DEFINE_ERROR(ValidationError);      // well-formed input violating an invariant
FLASHEVAL_DEFINE_ERROR(EmptySelection);       // empty prompt subset or model list
FLASHEVAL_DEFINE_ERROR(LengthMismatch);       // paired vectors of different length
FLASHEVAL_DEFINE_ERROR(TooFewModels);         // rank correlation needs >= 2 models
FLASHEVAL_DEFINE_ERROR(SizeError);            // requested subset size out of range
FLASHEVAL_DEFINE_ERROR(QuotaError);           // per-cluster quota not satisfiable
FLASHEVAL_DEFINE_ERROR(DegenerateData);       // fewer distinct points than clusters
FLASHEVAL_DEFINE_ERROR(TooFewPoints);         // moment fit needs >= 2 points
FLASHEVAL_DEFINE_ERROR(SingularCovariance);   // covariance not invertible
FLASHEVAL_DEFINE_ERROR(PopulationExhausted);  // prompt pool too small to continue
FLASHEVAL_DEFINE_ERROR(EmptySide);            // model split with an empty side
FLASHEVAL_DEFINE_ERROR(UnknownModel);         // split predicate names no zoo member
FLASHEVAL_DEFINE_ERROR(SpecError);            // invalid generator specification
FLASHEVAL_DEFINE_ERROR(ConstructionFailed);   // planted structure unreachable

#undef FLASHEVAL_DEFINE_ERROR

}  // namespace flasheval
