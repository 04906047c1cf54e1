#pragma once

#include "spanboot/treebank.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <string_view>

namespace spanboot
{

// Which representation a model reads. Concat stacks the inside block and the
// outside block (outside indices offset by the inside dimension).
enum class FeatureView
{
  Inside,
  Outside,
  Concat
};

std::string_view to_string(FeatureView view);
FeatureView parse_feature_view(std::string_view text);

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kHole = "<mask>";

// Hashed feature space of one view block.
struct FeatureSpace
{
  int hash_bits = 18;

  Eigen::Index block_dim() const { return Eigen::Index{1} << hash_bits; }
  Eigen::Index dim(FeatureView view) const { return view == FeatureView::Concat ? 2 * block_dim() : block_dim(); }

  auto operator<=>(const FeatureSpace&) const = default;
};

using FeatureVector = Eigen::SparseVector<double>;

// The outside view of span (i, j): (x_{i-1} or <s>, <mask>, x_{j+1} or </s>).
struct OutsideTriple
{
  std::string_view left;
  std::string_view hole = kHole;
  std::string_view right;
};

OutsideTriple outside_triple(const Sentence& sentence, Span span);

/// Sparse features of a span.
///
/// Inside: unigrams and bigrams of x_i..x_j (averaged over the span), the
/// boundary tokens x_i and x_j and their pair. Never reads a token outside
/// [i, j].
///
/// Outside: left token, right token, their pair and edge indicators. Never
/// reads a token inside [i, j].
FeatureVector featurize(const Sentence& sentence, Span span, FeatureView view, const FeatureSpace& space = {});

// 64-bit FNV-1a, stable across platforms.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

} // namespace spanboot
