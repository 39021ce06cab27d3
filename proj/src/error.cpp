#include "katlas/error.hpp"

namespace katlas {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::NoPositiveZero: return "NoPositiveZero";
    case ErrorKind::IntegratorFailure: return "IntegratorFailure";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::BracketNotFound: return "BracketNotFound";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::TailTooShort: return "TailTooShort";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::DegenerateRequiresA: return "DegenerateRequiresA";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ContinuumCase: return "ContinuumCase";
    case ErrorKind::NotOnContinuum: return "NotOnContinuum";
    case ErrorKind::EmptyAtlas: return "EmptyAtlas";
    case ErrorKind::OutOfRegime: return "OutOfRegime";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace katlas
