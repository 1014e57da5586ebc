#include "gpath/error.hpp"

namespace gpath {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::ProfileMismatch: return "ProfileMismatch";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NotInSupport: return "NotInSupport";
    case ErrorCode::TooLargeDegree: return "TooLargeDegree";
    case ErrorCode::ZeroParameter: return "ZeroParameter";
    case ErrorCode::BadDomain: return "BadDomain";
    case ErrorCode::UnsupportedFunctional: return "UnsupportedFunctional";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace gpath
