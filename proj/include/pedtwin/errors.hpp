#pragma once

#include <stdexcept>
#include <string>

namespace pedtwin {

/// Base of every error raised by the library. Callers that only need to
/// report a failure can catch this; the subclasses name the failed contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PEDTWIN_DEFINE_ERROR(Name)          \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

// geodesy
PEDTWIN_DEFINE_ERROR(DegenerateInput);
PEDTWIN_DEFINE_ERROR(NegativeArcLength);

// ingest
PEDTWIN_DEFINE_ERROR(ParseError);
PEDTWIN_DEFINE_ERROR(ValidationError);
PEDTWIN_DEFINE_ERROR(NonMonotonicTimestamp);
PEDTWIN_DEFINE_ERROR(InvalidZone);
PEDTWIN_DEFINE_ERROR(InsufficientHistory);
PEDTWIN_DEFINE_ERROR(NoAlignedSample);

// predictor
PEDTWIN_DEFINE_ERROR(ShapeMismatch);
PEDTWIN_DEFINE_ERROR(LengthMismatch);
PEDTWIN_DEFINE_ERROR(EmptyInput);
PEDTWIN_DEFINE_ERROR(EmptyDataset);
PEDTWIN_DEFINE_ERROR(FormatError);
PEDTWIN_DEFINE_ERROR(VersionMismatch);

// risk
PEDTWIN_DEFINE_ERROR(NonPositiveInput);
PEDTWIN_DEFINE_ERROR(ZeroDistance);

// scenario generation
PEDTWIN_DEFINE_ERROR(Infeasible);

// io
PEDTWIN_DEFINE_ERROR(IoError);

#undef PEDTWIN_DEFINE_ERROR

}  // namespace pedtwin
