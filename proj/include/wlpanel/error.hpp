#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wlpanel {

enum class ErrorCode
{
  // input / schema
  UnbalancedPanel,
  NonFiniteValue,
  DuplicateCell,
  InvalidArgument,
  ParseError,
  ConfigError,
  // estimation
  RankDeficient,
  TooFewIndividuals,
  NoWithinVariation,
  DomainError,
  RankDeficientUnderWeights,
  NoConvergedRoot,
  InfeasibleContamination,
};

std::string_view to_string(ErrorCode code);

/// True for codes caused by malformed input rather than by the estimation.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, std::string const& what)
    : std::runtime_error(what)
    , code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string const& what)
{
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

} // namespace wlpanel
