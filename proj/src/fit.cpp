#include "wlpanel/fit.hpp"

#include "wlpanel/error.hpp"

#include <string>

namespace wlpanel {

std::string_view to_string(EstimatorKind kind)
{
  switch (kind) {
    case EstimatorKind::pols: return "pols";
    case EstimatorKind::be: return "be";
    case EstimatorKind::fe: return "fe";
    case EstimatorKind::re: return "re";
    case EstimatorKind::wpols: return "wpols";
    case EstimatorKind::wbe: return "wbe";
    case EstimatorKind::wfe: return "wfe";
    case EstimatorKind::wre: return "wre";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view name)
{
  for (auto kind : kAllEstimators)
    if (to_string(kind) == name)
      return kind;
  fail(ErrorCode::InvalidArgument,
       "unknown estimator '" + std::string(name) +
         "' (expected one of pols,wpols,be,wbe,fe,wfe,re,wre)");
}

bool is_weighted(EstimatorKind kind)
{
  return kind == EstimatorKind::wpols || kind == EstimatorKind::wbe ||
         kind == EstimatorKind::wfe || kind == EstimatorKind::wre;
}

EstimatorKind classical_of(EstimatorKind kind)
{
  switch (kind) {
    case EstimatorKind::wpols: return EstimatorKind::pols;
    case EstimatorKind::wbe: return EstimatorKind::be;
    case EstimatorKind::wfe: return EstimatorKind::fe;
    case EstimatorKind::wre: return EstimatorKind::re;
    default: return kind;
  }
}

} // namespace wlpanel
