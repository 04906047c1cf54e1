#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace spanboot
{

// Inclusive token interval [i, j] of a sentence.
struct Span
{
  int i = 0;
  int j = 0;

  int length() const noexcept { return j - i + 1; }
  bool contains(const Span& other) const noexcept { return i <= other.i && other.j <= j; }

  auto operator<=>(const Span&) const = default;
};

// Sorted, duplicate-free set of spans.
using SpanSet = std::vector<Span>;

void sort_unique(SpanSet& spans);

struct Sentence
{
  std::int64_t id = 0;
  std::vector<std::string> tokens;

  int size() const noexcept { return static_cast<int>(tokens.size()); }
  bool valid(const Span& span) const noexcept { return 0 <= span.i && span.i <= span.j && span.j < size(); }
};

// Builds a sentence and checks the token invariants (non-empty, no empty or
// whitespace-bearing tokens). Throws Error(Format).
Sentence make_sentence(std::int64_t id, std::vector<std::string> tokens);

// Whitespace tokenization.
std::vector<std::string> split_tokens(std::string_view line);

// A node of an n-ary labeled tree. Leaves carry a token index, internal nodes
// carry children. Bare tokens in the bracketed input become leaves with an
// empty label; `(DT the)` becomes a leaf labeled DT.
struct TreeNode
{
  std::string label;
  std::vector<TreeNode> children;
  int leaf = -1;

  bool is_leaf() const noexcept { return leaf >= 0; }
};

struct GoldTree
{
  Sentence sentence;
  TreeNode root;
};

// Unlabeled binary bracketing. Holds the spans of length >= 2; a one-token
// sentence holds the single span (0, 0).
struct BinaryTree
{
  Sentence sentence;
  SpanSet spans;
};

/// Parses one PTB-style tree. A root with an empty label wrapping a single
/// tree, as in `( (S ...) )`, is unwrapped.
///
/// Throws Error with kind UnbalancedBrackets, EmptyTree or EmptyLabel.
GoldTree parse_bracketed(std::string_view text, std::int64_t id = 0);

// Parses every top-level tree in `text`; ids are assigned from 0.
std::vector<GoldTree> parse_treebank(std::string_view text);
std::vector<GoldTree> read_treebank(const std::filesystem::path& path);

// Canonical serialization: `(LABEL child ...)`, single spaces, bare tokens for
// unlabeled leaves.
std::string to_bracketed(const GoldTree& tree);

// `(X (X w1 w2) w3)` with placeholder label X; `(X w)` for a single token.
std::string to_bracketed(const BinaryTree& tree);

// Reads a tree in the decoder's output format back into a BinaryTree.
BinaryTree parse_binary_tree(std::string_view text, std::int64_t id = 0);

const std::set<std::string>& default_punctuation_tags();

struct NormalizeOptions
{
  bool drop_punct = true;
  bool collapse_unary = true;
  bool drop_empty_elements = true; // -NONE- traces
  std::set<std::string> punct_tags = default_punctuation_tags();
};

/// Removes punctuation preterminals (by tag) and empty elements, re-packs leaf
/// indices, prunes childless nodes and collapses unary chains below the root
/// keeping the topmost label. The root itself is kept even when it has a single
/// child. Idempotent.
///
/// Throws Error(AllTokensRemoved) when nothing is left.
GoldTree normalize(const GoldTree& tree, const NormalizeOptions& options = {});

// Spans of internal nodes, as a set. With exclude_trivial, single-token and
// whole-sentence spans are removed.
SpanSet gold_spans(const GoldTree& tree, bool exclude_trivial);

struct LabeledSpan
{
  Span span;
  std::string label;

  auto operator<=>(const LabeledSpan&) const = default;
};

// One entry per internal node, in pre-order (duplicates kept).
std::vector<LabeledSpan> labeled_spans(const GoldTree& tree);

// "NP-SBJ-1" -> "NP", "PP=2" -> "PP"; labels starting with '-' are returned as-is.
std::string strip_function_tags(std::string_view label);

// True when every character is ASCII punctuation.
bool is_punctuation_token(std::string_view token);

// Drops tokens from the end while they are punctuation. Keeps at least one token.
void strip_trailing_punctuation(std::vector<std::string>& tokens);

struct CorpusOptions
{
  NormalizeOptions normalize;          // bracketed input only
  bool strip_trailing_punct = false;   // plain text only
};

/// Reads a corpus: one whitespace-tokenized sentence per line, or (when the
/// first non-blank character is '(') a bracketed treebank whose normalized
/// yields are returned. Blank lines are skipped; ids are 0..N-1 in file order.
///
/// Throws Error with kind IoError or EmptyCorpus.
std::vector<Sentence> read_corpus(const std::filesystem::path& path, const CorpusOptions& options = {});

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace spanboot
