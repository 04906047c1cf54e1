#include "spanboot/error.hpp"

namespace spanboot
{

std::string_view to_string(ErrorKind kind)
{
  switch (kind)
  {
  case ErrorKind::UnbalancedBrackets: return "UnbalancedBrackets";
  case ErrorKind::EmptyTree: return "EmptyTree";
  case ErrorKind::EmptyLabel: return "EmptyLabel";
  case ErrorKind::AllTokensRemoved: return "AllTokensRemoved";
  case ErrorKind::EmptyCorpus: return "EmptyCorpus";
  case ErrorKind::IoError: return "IoError";
  case ErrorKind::YieldMismatch: return "YieldMismatch";
  case ErrorKind::LengthMismatch: return "LengthMismatch";
  case ErrorKind::Format: return "FormatError";
  case ErrorKind::SingleClassInput: return "SingleClassInput";
  case ErrorKind::TooLarge: return "TooLarge";
  case ErrorKind::NonterminatingGrammar: return "NonterminatingGrammar";
  case ErrorKind::InvalidConfig: return "InvalidConfig";
  case ErrorKind::ExternalScorer: return "ExternalScorerError";
  case ErrorKind::Timeout: return "Timeout";
  }
  return "Error";
}

int exit_code(ErrorKind kind)
{
  switch (kind)
  {
  case ErrorKind::InvalidConfig:
    return 1;
  case ErrorKind::UnbalancedBrackets:
  case ErrorKind::EmptyTree:
  case ErrorKind::EmptyLabel:
  case ErrorKind::AllTokensRemoved:
  case ErrorKind::EmptyCorpus:
  case ErrorKind::IoError:
  case ErrorKind::YieldMismatch:
  case ErrorKind::LengthMismatch:
  case ErrorKind::Format:
  case ErrorKind::SingleClassInput:
  case ErrorKind::TooLarge:
  case ErrorKind::NonterminatingGrammar:
    return 2;
  case ErrorKind::ExternalScorer:
  case ErrorKind::Timeout:
    return 3;
  }
  return 3;
}

} // namespace spanboot
