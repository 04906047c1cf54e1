#pragma once

#include "spanboot/seed_bootstrap.hpp"
#include "spanboot/span_scorer.hpp"

#include <chrono>
#include <string>

namespace spanboot
{

/// Scorer backed by a child process speaking a line protocol on stdin/stdout.
/// Each request is one JSON object per line,
///   {"view":"inside","tokens":["a","b"],"i":0,"j":1}
/// and each response one line holding a probability literal in [0, 1].
/// Requests are answered in order. A response that is not a number in range
/// raises Error(ExternalScorer); no response within `timeout` raises
/// Error(Timeout). The process is started by `/bin/sh -c command`.
class ExternalScorer final : public Scorer
{
public:
  ExternalScorer(std::string command, View view, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ExternalScorer() override;

  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  double score(const Sentence& sentence, Span span) const override;

  View view() const noexcept { return view_; }

private:
  std::string read_line() const;
  void shutdown() noexcept;

  std::string command_;
  View view_;
  std::chrono::milliseconds timeout_;
  int socket_ = -1;
  int pid_ = -1;
  mutable std::string buffer_;
  mutable bool broken_ = false;
};

} // namespace spanboot
