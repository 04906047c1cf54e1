#pragma once

#include "spanboot/treebank.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spanboot
{

enum class EvalMode
{
  MacroSentence, // mean of per-sentence F1
  MicroCorpus,   // F1 of span counts pooled over the corpus
  EvalbStyle     // pooled, duplicates and whole-sentence spans counted
};

std::string_view to_string(EvalMode mode);
EvalMode parse_eval_mode(std::string_view text);

struct EvalConfig
{
  EvalMode mode = EvalMode::MacroSentence;
  // Drop single-token and whole-sentence spans from both sides.
  bool exclude_trivial = true;
  // Compare span sets rather than multisets.
  bool dedup_spans = true;
  // Sentences longer than this are left out entirely.
  std::optional<int> max_len;
  // Additional pooled summary over sentences of at most this length.
  std::optional<int> cutoff_len;
  int bucket_width = 5;
  bool strip_function_tags = true;
  // Skip sentences whose yields differ instead of throwing.
  bool skip_yield_mismatch = false;

  // Throws Error(InvalidConfig), including for an evalb mode that dedups or
  // drops whole-sentence spans.
  void validate() const;

  // Unlabeled evalb emulation: CUTOFF_LEN 10, duplicates and the sentence span
  // counted, -NONE- removed by normalization.
  static EvalConfig evalb();
};

struct SentenceScore
{
  std::size_t index = 0;
  int length = 0;
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct BucketScore
{
  int first = 0; // inclusive token-count range
  int last = 0;
  std::size_t count = 0;
  double f1 = 0.0;
};

struct EvalReport
{
  EvalMode mode = EvalMode::MacroSentence;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::vector<SentenceScore> per_sentence;
  std::map<std::string, double> per_label_recall;
  std::vector<BucketScore> length_buckets;
  std::optional<double> cutoff_f1;
  // Indices of the sentences skipped for a yield mismatch.
  std::vector<std::size_t> yield_mismatches;
};

/// Span comparison for one sentence. Precision is 1 for an empty prediction
/// and recall is 1 for an empty gold set; F1 = 2PR / (P + R), 0 when P + R = 0.
/// Two empty sets therefore score 1.
///
/// Throws Error(YieldMismatch) when the token sequences differ.
SentenceScore score_sentence(const BinaryTree& pred, const GoldTree& gold, const EvalConfig& config);

double sentence_f1(const BinaryTree& pred, const GoldTree& gold, const EvalConfig& config);

/// Throws Error(LengthMismatch) when the lists differ in length, and
/// Error(YieldMismatch) unless config.skip_yield_mismatch.
EvalReport corpus_eval(std::span<const BinaryTree> preds, std::span<const GoldTree> golds, const EvalConfig& config);

/// For each gold label, the fraction of its spans found among the predicted
/// spans, pooled over the corpus. Trivial spans follow `exclude_trivial`.
std::map<std::string, double> label_recall(std::span<const BinaryTree> preds, std::span<const GoldTree> golds,
                                           const EvalConfig& config);

enum class Baseline
{
  Left,
  Right,
  Balanced,
  Random
};

std::string_view to_string(Baseline baseline);

// The baseline bracketing of every gold sentence.
std::vector<BinaryTree> baseline_trees(std::span<const GoldTree> golds, Baseline which, std::uint64_t seed = 0);

EvalReport trivial_baseline(std::span<const GoldTree> golds, Baseline which, const EvalConfig& config,
                            std::uint64_t seed = 0);

// Per sentence, the binary tree with the most gold spans (CYK over a 0/1 chart).
std::vector<BinaryTree> oracle_trees(std::span<const GoldTree> golds);

EvalReport oracle_binary(std::span<const GoldTree> golds, const EvalConfig& config);

// ---------------------------------------------------------------------------
// Report files

// A named row of a summary (e.g. "model", "LB", "oracle").
struct ReportRow
{
  std::string name;
  EvalReport report;
};

// JSON document with one entry per row: f1, precision, recall, sentence count,
// label recall and the cutoff summary.
std::string format_summary(std::span<const ReportRow> rows);

// `index length matched predicted gold precision recall f1`, tab separated,
// with a header line.
std::string format_score_table(const EvalReport& report);

// `first last count f1`, tab separated, one row per occupied bucket.
std::string format_bucket_table(const EvalReport& report);

// Trees are aligned by position and must come in equal numbers.
std::vector<BinaryTree> read_predictions(std::string_view text);

} // namespace spanboot
