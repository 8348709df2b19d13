#include "etv/error.hpp"

namespace etv {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::DemandMismatch: return "DemandMismatch";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::DemandViolation: return "DemandViolation";
    case ErrorKind::RiskViolation: return "RiskViolation";
    case ErrorKind::StrandedUser: return "StrandedUser";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::EmptyDeliveries: return "EmptyDeliveries";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace etv
