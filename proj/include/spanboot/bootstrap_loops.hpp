#pragma once

#include "spanboot/seed_bootstrap.hpp"
#include "spanboot/span_scorer.hpp"
#include "spanboot/treebank.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spanboot
{

struct LoopConfig
{
  int iterations = 5;
  std::size_t c = 1000;
  std::size_t d = 10000;
  Thresholds thresholds;
  // Only the first pool_cap sentences of U are scored.
  std::size_t pool_cap = 5000;
  std::uint64_t rng_seed = 0;
  // Self-training only: grow I instead of replacing it each iteration.
  bool accumulate_self_train = false;
  int min_span_len = 2;
  TrainOptions train;

  // Throws Error(InvalidConfig).
  void validate() const;
};

// Outcome of one select_confident call inside a loop.
struct PoolStats
{
  std::size_t constituent_pool = 0;
  std::size_t distituent_pool = 0;
  std::size_t selected_constituents = 0;
  std::size_t selected_distituents = 0;
  // A pool held fewer candidates than requested.
  bool exhausted = false;
};

struct IterationRecord
{
  std::string loop;
  int iteration = 0;
  std::size_t inside_size = 0;
  std::size_t outside_size = 0;
  // Pools ranked by the inside model, and by the outside model (co-training).
  std::optional<PoolStats> inside_pools;
  std::optional<PoolStats> outside_pools;
  std::map<std::string, double> metrics;
};

struct LoopTrace
{
  std::vector<IterationRecord> records;
  std::vector<std::string> warnings;
};

// One JSON object per record.
std::string format_trace(const LoopTrace& trace);
LoopTrace parse_trace(std::string_view text);

/// Called after every iteration with the models as they stand; the returned
/// values land in the iteration record. `outside` is null while no outside
/// model exists.
using MetricsCallback = std::function<std::map<std::string, double>(int iteration, const SpanScorer& inside,
                                                                    const SpanScorer* outside)>;

struct LoopResult
{
  SpanScorer inside;
  SpanScorer outside;
  LoopTrace trace;
  std::vector<LabeledSpanExample> inside_set;
  std::vector<LabeledSpanExample> outside_set;
};

/// Iterative self-training of the inside model. Each iteration trains m_in on
/// I, ranks the spans of U with it and sets I to the sampled confident
/// examples (or appends them, with accumulate_self_train). After the loop the
/// final I is copied to the outside view and m_out is trained on it.
///
/// Example sentence ids index `table`; the sentences of U must appear in
/// `table` under the same ids. Throws Error(SingleClassInput) when a training
/// set loses a class, e.g. with c = d = 0.
LoopResult self_train(std::span<const LabeledSpanExample> inside, std::span<const Sentence> table,
                      std::span<const Sentence> unlabeled, const LoopConfig& config,
                      const MetricsCallback& metrics = {});

/// Iterative co-training. m_out starts from O; then per iteration the outside
/// model's confident spans join I, m_in is retrained from scratch, the inside
/// model's confident spans join O and m_out is retrained. Joins skip spans
/// already present in the target set.
LoopResult co_train(std::span<const LabeledSpanExample> inside, std::span<const LabeledSpanExample> outside,
                    std::span<const Sentence> table, std::span<const Sentence> unlabeled, const LoopConfig& config,
                    const MetricsCallback& metrics = {});

/// One classifier over concatenated inside and outside features, trained on
/// the distinct spans of I and O.
SpanScorer concat_baseline(std::span<const LabeledSpanExample> inside, std::span<const LabeledSpanExample> outside,
                           std::span<const Sentence> table, const TrainOptions& options);

// Same spans and labels, relabelled with `view`.
std::vector<LabeledSpanExample> with_view(std::span<const LabeledSpanExample> examples, View view);

/// Appends the examples of `extra` whose (sentence, span) is not yet in
/// `target`. Returns the number appended.
std::size_t merge_examples(std::vector<LabeledSpanExample>& target, std::span<const LabeledSpanExample> extra);

/// Evaluator for tune_slice_count: generates seeds with the candidate config,
/// holds out a shuffled validation fraction, trains an inside model on the
/// rest and returns binary F1 on the held-out seeds.
SeedEvaluator seed_validation_evaluator(std::span<const Sentence> corpus, const TrainOptions& options);

} // namespace spanboot
