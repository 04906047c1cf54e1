#pragma once

#include "spanboot/treebank.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spanboot
{

enum class View
{
  Inside,
  Outside
};

std::string_view to_string(View view);
View parse_view(std::string_view text);

// Training atom of both classifiers: label 1 marks a constituent, 0 a distituent.
struct LabeledSpanExample
{
  std::int64_t sentence_id = 0;
  Span span;
  int label = 0;
  View view = View::Inside;

  auto operator<=>(const LabeledSpanExample&) const = default;
};

// Checked lookup into a table whose ids are dense (sentence k has id k).
const Sentence& lookup(std::span<const Sentence> table, std::int64_t id);

enum class Branching
{
  Right,
  Left
};

// Template: the fixed slice family; Random: prefixes (or suffixes) cut at a
// random point, used as an ablation of the template.
enum class DistituentMode
{
  Template,
  Random
};

struct SeedConfig
{
  Branching branching = Branching::Right;
  int num_slices = 6;
  int min_span_len = 2;
  bool casing_augmentation = true;
  bool star_split = false;
  std::uint64_t rng_seed = 0;
  DistituentMode distituent_mode = DistituentMode::Template;
  int lowercase_copy_label = 1;

  // Throws Error(InvalidConfig).
  void validate() const;
};

// Lower-cased copies of title-case runs cannot point into the corpus, so they
// live in `augmented`, with ids continuing after the corpus.
struct SeedSet
{
  std::vector<LabeledSpanExample> examples;
  std::vector<Sentence> augmented;
};

/// Builds the initial inside-view training set from raw sentences.
///
/// Per sentence of length n: (0, n-1) is a constituent. With right branching
/// the distituents are (0, n-1-k), with left branching (k, n-1), for
/// k = 1..num_slices; slices shorter than min_span_len are skipped. Star
/// splitting adds the fragments between "*" tokens, casing augmentation adds
/// maximal title-case runs (apostrophe tokens allowed after the first token)
/// and lower-cased copies of the runs that begin with the most common
/// sentence-initial word. A distituent that coincides with a constituent of the
/// same sentence is dropped.
///
/// Corpus ids must be dense. Throws Error(EmptyCorpus).
SeedSet generate_seeds(std::span<const Sentence> corpus, const SeedConfig& config);

// Most frequent first token, ties broken lexicographically. Empty corpus -> "".
std::string most_common_first_word(std::span<const Sentence> corpus);

// Maximal runs of length >= 2 starting with a title-case token.
std::vector<Span> title_case_runs(const Sentence& sentence);

bool is_title_case(std::string_view token);

struct ClassBalance
{
  std::size_t constituents = 0;
  std::size_t distituents = 0;

  auto operator<=>(const ClassBalance&) const = default;
};

ClassBalance class_balance(std::span<const LabeledSpanExample> examples);

// Validation F1 obtained when seeding with a given config.
using SeedEvaluator = std::function<double(const SeedConfig&)>;

/// Hill-climbs num_slices by +-1 from the starting value, first upwards, then
/// downwards if the first upward move does not improve. Stops at the last
/// value before the validation F1 fails to increase.
SeedConfig tune_slice_count(const SeedConfig& start, const SeedEvaluator& evaluate, int max_slices = 20);

// `sentence_id <TAB> i <TAB> j <TAB> label <TAB> view` per line.
std::string format_seed_file(std::span<const LabeledSpanExample> examples);
std::vector<LabeledSpanExample> parse_seed_file(std::string_view text);

// `id <TAB> tokens` per line, for the augmented sentences.
std::string format_sentence_table(std::span<const Sentence> sentences);
std::vector<Sentence> parse_sentence_table(std::string_view text);

} // namespace spanboot
