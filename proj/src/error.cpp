#include "wlpanel/error.hpp"

namespace wlpanel {

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::UnbalancedPanel: return "UnbalancedPanel";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::TooFewIndividuals: return "TooFewIndividuals";
    case ErrorCode::NoWithinVariation: return "NoWithinVariation";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::RankDeficientUnderWeights: return "RankDeficientUnderWeights";
    case ErrorCode::NoConvergedRoot: return "NoConvergedRoot";
    case ErrorCode::InfeasibleContamination: return "InfeasibleContamination";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code)
{
  switch (code) {
    case ErrorCode::UnbalancedPanel:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::DuplicateCell:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::ConfigError:
      return true;
    default:
      return false;
  }
}

} // namespace wlpanel
