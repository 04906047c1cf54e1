#include "spanboot/features.hpp"

#include "spanboot/error.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace spanboot
{

std::string_view to_string(FeatureView view)
{
  switch (view)
  {
  case FeatureView::Inside: return "inside";
  case FeatureView::Outside: return "outside";
  case FeatureView::Concat: return "concat";
  }
  return "inside";
}

FeatureView parse_feature_view(std::string_view text)
{
  if (text == "inside")
    return FeatureView::Inside;
  if (text == "outside")
    return FeatureView::Outside;
  if (text == "concat")
    return FeatureView::Concat;
  throw Error(ErrorKind::Format, "unknown feature view '" + std::string(text) + "'");
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed)
{
  std::uint64_t h = seed;
  for (unsigned char c : bytes)
  {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

OutsideTriple outside_triple(const Sentence& sentence, Span span)
{
  OutsideTriple t;
  t.left = span.i == 0 ? kBos : std::string_view(sentence.tokens[span.i - 1]);
  t.right = span.j + 1 >= sentence.size() ? kEos : std::string_view(sentence.tokens[span.j + 1]);
  return t;
}

namespace
{

class Builder
{
public:
  Builder(Eigen::Index block, Eigen::Index offset) : mask_(static_cast<std::uint64_t>(block) - 1), offset_(offset) {}

  void add(std::string_view tag, std::string_view a, double weight = 1.0)
  {
    push(fnv1a(a, fnv1a(tag)), weight);
  }

  void add(std::string_view tag, std::string_view a, std::string_view b, double weight = 1.0)
  {
    // 0x1f separates the parts so ("ab","c") and ("a","bc") differ.
    push(fnv1a(b, fnv1a("\x1f", fnv1a(a, fnv1a(tag)))), weight);
  }

  std::vector<std::pair<Eigen::Index, double>>& entries() { return entries_; }

private:
  void push(std::uint64_t h, double weight)
  {
    entries_.emplace_back(offset_ + static_cast<Eigen::Index>(h & mask_), weight);
  }

  std::uint64_t mask_;
  Eigen::Index offset_;
  std::vector<std::pair<Eigen::Index, double>> entries_;
};

void inside_features(const Sentence& s, Span span, Builder& b)
{
  const auto& t = s.tokens;
  // Bag features are averaged so that long spans do not pile up weight.
  const double unigram = 1.0 / span.length();
  const double bigram = span.length() > 1 ? 1.0 / (span.length() - 1) : 0.0;
  for (int k = span.i; k <= span.j; ++k)
  {
    b.add("w", t[k], unigram);
    if (k < span.j)
      b.add("bg", t[k], t[k + 1], bigram);
  }
  b.add("first", t[span.i]);
  b.add("last", t[span.j]);
  b.add("fl", t[span.i], t[span.j]);
}

void outside_features(const Sentence& s, Span span, Builder& b)
{
  const OutsideTriple t = outside_triple(s, span);
  b.add("oleft", t.left);
  b.add("oright", t.right);
  b.add("opair", t.left, t.right);
  if (t.left == kBos)
    b.add("oedge", "bos");
  if (t.right == kEos)
    b.add("oedge", "eos");
}

FeatureVector to_sparse(std::vector<std::pair<Eigen::Index, double>>& entries, Eigen::Index dim)
{
  // Stable order of summation keeps colliding weights bit-identical.
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  FeatureVector v(dim);
  v.reserve(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t k = 0; k < entries.size();)
  {
    double value = 0.0;
    std::size_t end = k;
    for (; end < entries.size() && entries[end].first == entries[k].first; ++end)
      value += entries[end].second;
    v.insertBack(entries[k].first) = value;
    k = end;
  }
  return v;
}

} // namespace

FeatureVector featurize(const Sentence& sentence, Span span, FeatureView view, const FeatureSpace& space)
{
  if (!sentence.valid(span))
    throw Error(ErrorKind::Format, "span (" + std::to_string(span.i) + ", " + std::to_string(span.j) +
                                       ") is not valid for sentence " + std::to_string(sentence.id));
  const Eigen::Index block = space.block_dim();
  std::vector<std::pair<Eigen::Index, double>> entries;
  if (view != FeatureView::Outside)
  {
    Builder b(block, 0);
    inside_features(sentence, span, b);
    entries = std::move(b.entries());
  }
  if (view != FeatureView::Inside)
  {
    Builder b(block, view == FeatureView::Concat ? block : 0);
    outside_features(sentence, span, b);
    entries.insert(entries.end(), b.entries().begin(), b.entries().end());
  }
  return to_sparse(entries, space.dim(view));
}

} // namespace spanboot
