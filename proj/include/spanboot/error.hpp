#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spanboot
{

enum class ErrorKind
{
  // input data
  UnbalancedBrackets,
  EmptyTree,
  EmptyLabel,
  AllTokensRemoved,
  EmptyCorpus,
  IoError,
  YieldMismatch,
  LengthMismatch,
  Format,
  // learning
  SingleClassInput,
  // decoding / enumeration
  TooLarge,
  // synthetic data
  NonterminatingGrammar,
  // configuration and protocol
  InvalidConfig,
  ExternalScorer,
  Timeout,
};

std::string_view to_string(ErrorKind kind);

// Process exit code for a failure of this kind: 1 usage/config, 2 data, 3 internal.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
  {
  }

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace spanboot
