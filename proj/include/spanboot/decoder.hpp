#pragma once

#include "spanboot/random.hpp"
#include "spanboot/score_chart.hpp"
#include "spanboot/treebank.hpp"

#include <Eigen/Core>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace spanboot
{

template <typename Scalar>
struct Decoded
{
  SpanSet spans; // spans of length >= 2, or {(0,0)} for n == 1
  Scalar objective{};
};

/// Maximizes the sum of s(i, j) over the spans of a binary tree, leaf cells
/// included:
///
///   best(i, i) = s(i, i)
///   best(i, j) = s(i, j) + max_k best(i, k) + best(k+1, j)
///
/// Ties go to the smallest split point k.
template <typename Scalar>
Decoded<Scalar> cyk_decode_spans(const ScoreChartT<Scalar>& chart)
{
  const int n = chart.size();
  Decoded<Scalar> out;
  if (n <= 0)
    return out;
  if (n == 1)
  {
    out.spans.push_back(Span{0, 0});
    out.objective = chart(0, 0);
    return out;
  }

  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix best = Matrix::Zero(n, n);
  Eigen::MatrixXi split = Eigen::MatrixXi::Constant(n, n, -1);
  for (int i = 0; i < n; ++i)
    best(i, i) = chart(i, i);

  for (int len = 2; len <= n; ++len)
  {
    for (int i = 0; i + len - 1 < n; ++i)
    {
      const int j = i + len - 1;
      int arg = i;
      Scalar top = best(i, i) + best(i + 1, j);
      for (int k = i + 1; k < j; ++k)
      {
        const Scalar candidate = best(i, k) + best(k + 1, j);
        if (candidate > top)
        {
          top = candidate;
          arg = k;
        }
      }
      best(i, j) = chart(i, j) + top;
      split(i, j) = arg;
    }
  }

  std::vector<Span> stack{Span{0, n - 1}};
  while (!stack.empty())
  {
    const Span s = stack.back();
    stack.pop_back();
    if (s.length() < 2)
      continue;
    out.spans.push_back(s);
    const int k = split(s.i, s.j);
    stack.push_back(Span{s.i, k});
    stack.push_back(Span{k + 1, s.j});
  }
  sort_unique(out.spans);
  out.objective = best(0, n - 1);
  return out;
}

// Argmax binary tree for `sentence`; chart size must equal the sentence length.
BinaryTree cyk_decode(const ScoreChart& chart, const Sentence& sentence);

// Sum of chart cells over the tree's spans plus every leaf cell.
template <typename Scalar>
Scalar tree_objective(const ScoreChartT<Scalar>& chart, const SpanSet& spans)
{
  Scalar total{};
  for (int i = 0; i < chart.size(); ++i)
    total += chart(i, i);
  for (const Span& s : spans)
    if (s.length() >= 2)
      total += chart(s.i, s.j);
  return total;
}

// Checks the BinaryTree invariants for a sentence of length n.
bool is_binary_bracketing(const SpanSet& spans, int n);

/// Every binary bracketing of n tokens (Catalan(n-1) of them), each as a
/// sorted SpanSet in the same convention as cyk_decode_spans.
///
/// Throws Error(TooLarge) for n > 12.
std::vector<SpanSet> enumerate_trees(int n);

constexpr int kMaxEnumerationLength = 12;

SpanSet left_branching(int n);
SpanSet right_branching(int n);
// Splits each span so the left part holds ceil(len / 2) tokens.
SpanSet balanced_tree(int n);
// Uniform split point at every node.
SpanSet random_tree(int n, Rng& rng);

// ---------------------------------------------------------------------------
// Chart refinement heuristics

struct HeuristicConfig
{
  std::optional<std::string> comma_successor_word;
  std::optional<std::string> common_start_word;
  std::set<std::string> stopword_set;
  std::set<std::string> top_frequency_set;
  bool enabled = false;

  void validate() const;
};

// Bundled English stopword list (lower case).
const std::set<std::string>& english_stopwords();

// Statistics are read from the training corpus only: the most frequent word
// after ",", the most frequent first word and the top_k most frequent tokens
// (ties broken lexicographically).
HeuristicConfig derive_heuristics(std::span<const Sentence> corpus, std::size_t top_k = 100);

/// Rewrites chart cells:
///   (a) spans starting or ending with comma_successor_word -> 0
///   (b) span (0, 1) when token 0 is common_start_word and token 1 is not a
///       stopword -> 1
///   (c) proper sub-spans (length >= 2) of a maximal run of rare title-case or
///       upper-case tokens -> 0
/// A disabled config returns the chart unchanged.
ScoreChart apply_heuristics(const ScoreChart& chart, const Sentence& sentence, const HeuristicConfig& config);

// Runs of length >= 2 of capitalized tokens outside the top-frequency set.
std::vector<Span> rare_capitalized_runs(const Sentence& sentence, const std::set<std::string>& top_frequency);

} // namespace spanboot
