#pragma once
// Typed error hierarchy. Every operation failure carries a kind so callers
// (in particular the pipeline runner) can record findings without string matching.

#include <stdexcept>
#include <string>

namespace geovar {

enum class ErrorKind {
  PointOutsideDomain,
  OrderUnsupportedForFamily,
  DegenerateMetric,
  LeftDomain,
  StepCountTooSmall,
  NoConvergence,
  SingularEndpointJacobian,
  NoIntervalFound,
  GridMismatch,
  NotPeriodic,
  NotCriticalPoint,
  NotLightlike,
  NotAGeodesic,
  NotJacobi,
  NotVertical,
  TubeIntersectsCurve,
  VParallel,
  BothVelocitiesVanish,
  AlphaNotPositive,
  BetaNotPositive,
  EndpointsEqual,
  ParseError,
  ValidationError,
  IoError,
  Internal,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace geovar
