#include "fpr/errors.hpp"

namespace fpr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidTime: return "invalid-time";
    case ErrorKind::BoundaryEvaluation: return "boundary-evaluation";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::IncompatibleModels: return "incompatible-models";
    case ErrorKind::SingularTime: return "singular-time";
    case ErrorKind::TrigSingularity: return "trig-singularity";
    case ErrorKind::SolverBreakdown: return "solver-breakdown";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::WholePathRejected: return "whole-path-rejected";
    case ErrorKind::SamplingFailure: return "sampling-failure";
    case ErrorKind::SimulationBlowup: return "simulation-blowup";
    case ErrorKind::UnknownProcess: return "unknown-process";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace fpr
