#include "spanboot/decoder.hpp"

#include "spanboot/error.hpp"
#include "spanboot/seed_bootstrap.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <utility>

namespace spanboot
{

namespace detail
{
extern const std::string_view kEnglishStopwords;
}

BinaryTree cyk_decode(const ScoreChart& chart, const Sentence& sentence)
{
  if (chart.size() != sentence.size())
    throw Error(ErrorKind::LengthMismatch, "chart size " + std::to_string(chart.size()) +
                                               " does not match sentence length " + std::to_string(sentence.size()));
  if (sentence.size() < 1)
    throw Error(ErrorKind::InvalidConfig, "cannot decode an empty sentence");
  return BinaryTree{sentence, cyk_decode_spans(chart).spans};
}

namespace
{

// Returns false on any structural violation; counts visited spans.
bool check_subtree(const SpanSet& spans, Span s, std::size_t& visited)
{
  if (s.length() == 1)
    return true;
  if (!std::binary_search(spans.begin(), spans.end(), s))
    return false;
  ++visited;
  int k = s.i;
  for (int cand = s.j - 1; cand > s.i; --cand)
  {
    if (std::binary_search(spans.begin(), spans.end(), Span{s.i, cand}))
    {
      k = cand;
      break;
    }
  }
  return check_subtree(spans, Span{s.i, k}, visited) && check_subtree(spans, Span{k + 1, s.j}, visited);
}

} // namespace

bool is_binary_bracketing(const SpanSet& spans, int n)
{
  if (n < 1)
    return false;
  if (n == 1)
    return spans.size() == 1 && spans.front() == Span{0, 0};
  if (!std::is_sorted(spans.begin(), spans.end()) ||
      std::adjacent_find(spans.begin(), spans.end()) != spans.end())
    return false;
  if (static_cast<int>(spans.size()) != n - 1)
    return false;
  for (const Span& s : spans)
    if (s.i < 0 || s.j >= n || s.length() < 2)
      return false;
  std::size_t visited = 0;
  return check_subtree(spans, Span{0, n - 1}, visited) && visited == spans.size();
}

std::vector<SpanSet> enumerate_trees(int n)
{
  if (n < 1)
    throw Error(ErrorKind::InvalidConfig, "enumerate_trees needs n >= 1");
  if (n > kMaxEnumerationLength)
    throw Error(ErrorKind::TooLarge, "enumerate_trees is limited to n <= " + std::to_string(kMaxEnumerationLength));
  if (n == 1)
    return {SpanSet{Span{0, 0}}};

  // memo[i][j]: all bracketings of [i, j] as lists of internal spans
  std::map<std::pair<int, int>, std::vector<SpanSet>> memo;
  for (int i = 0; i < n; ++i)
    memo[{i, i}] = {SpanSet{}};
  for (int len = 2; len <= n; ++len)
  {
    for (int i = 0; i + len - 1 < n; ++i)
    {
      const int j = i + len - 1;
      std::vector<SpanSet> trees;
      for (int k = i; k < j; ++k)
      {
        for (const auto& left : memo[{i, k}])
        {
          for (const auto& right : memo[{k + 1, j}])
          {
            SpanSet t{Span{i, j}};
            t.insert(t.end(), left.begin(), left.end());
            t.insert(t.end(), right.begin(), right.end());
            trees.push_back(std::move(t));
          }
        }
      }
      memo[{i, j}] = std::move(trees);
    }
  }
  auto all = std::move(memo[{0, n - 1}]);
  for (auto& t : all)
    std::sort(t.begin(), t.end());
  return all;
}

SpanSet left_branching(int n)
{
  if (n == 1)
    return {Span{0, 0}};
  SpanSet spans;
  for (int k = 1; k < n; ++k)
    spans.push_back(Span{0, k});
  return spans;
}

SpanSet right_branching(int n)
{
  if (n == 1)
    return {Span{0, 0}};
  SpanSet spans;
  for (int k = 0; k + 1 < n; ++k)
    spans.push_back(Span{k, n - 1});
  sort_unique(spans);
  return spans;
}

namespace
{

void balanced_into(Span s, SpanSet& out)
{
  if (s.length() < 2)
    return;
  out.push_back(s);
  const int left = (s.length() + 1) / 2;
  balanced_into(Span{s.i, s.i + left - 1}, out);
  balanced_into(Span{s.i + left, s.j}, out);
}

void random_into(Span s, Rng& rng, SpanSet& out)
{
  if (s.length() < 2)
    return;
  out.push_back(s);
  const int k = s.i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(s.length() - 1)));
  random_into(Span{s.i, k}, rng, out);
  random_into(Span{k + 1, s.j}, rng, out);
}

} // namespace

SpanSet balanced_tree(int n)
{
  if (n == 1)
    return {Span{0, 0}};
  SpanSet spans;
  balanced_into(Span{0, n - 1}, spans);
  sort_unique(spans);
  return spans;
}

SpanSet random_tree(int n, Rng& rng)
{
  if (n == 1)
    return {Span{0, 0}};
  SpanSet spans;
  random_into(Span{0, n - 1}, rng, spans);
  sort_unique(spans);
  return spans;
}

// ---------------------------------------------------------------------------
// Heuristics

void HeuristicConfig::validate() const
{
  if (enabled && top_frequency_set.size() > 100)
    throw Error(ErrorKind::InvalidConfig, "top_frequency_set holds more than 100 tokens");
}

const std::set<std::string>& english_stopwords()
{
  static const std::set<std::string> words = [] {
    std::set<std::string> out;
    for (auto& w : split_tokens(detail::kEnglishStopwords))
      out.insert(std::move(w));
    return out;
  }();
  return words;
}

namespace
{

std::string lowercase(std::string_view token)
{
  std::string out(token);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::string> most_frequent(const std::map<std::string, std::size_t>& counts)
{
  std::optional<std::string> best;
  std::size_t best_count = 0;
  for (const auto& [word, count] : counts)
  {
    if (count > best_count)
    {
      best = word;
      best_count = count;
    }
  }
  return best;
}

} // namespace

HeuristicConfig derive_heuristics(std::span<const Sentence> corpus, std::size_t top_k)
{
  std::map<std::string, std::size_t> after_comma;
  std::map<std::string, std::size_t> freq;
  for (const auto& s : corpus)
  {
    for (std::size_t k = 0; k < s.tokens.size(); ++k)
    {
      ++freq[s.tokens[k]];
      if (k > 0 && s.tokens[k - 1] == ",")
        ++after_comma[s.tokens[k]];
    }
  }

  HeuristicConfig config;
  config.enabled = true;
  config.comma_successor_word = most_frequent(after_comma);
  const std::string first = most_common_first_word(corpus);
  if (!first.empty())
    config.common_start_word = first;
  config.stopword_set = english_stopwords();

  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t k = 0; k < ranked.size() && k < std::min<std::size_t>(top_k, 100); ++k)
    config.top_frequency_set.insert(ranked[k].first);
  return config;
}

std::vector<Span> rare_capitalized_runs(const Sentence& sentence, const std::set<std::string>& top_frequency)
{
  auto rare_cap = [&](const std::string& t) { return is_title_case(t) && top_frequency.count(t) == 0; };
  std::vector<Span> runs;
  const int n = sentence.size();
  for (int k = 0; k < n;)
  {
    if (!rare_cap(sentence.tokens[k]))
    {
      ++k;
      continue;
    }
    int end = k;
    while (end + 1 < n && rare_cap(sentence.tokens[end + 1]))
      ++end;
    if (end > k)
      runs.push_back(Span{k, end});
    k = end + 1;
  }
  return runs;
}

ScoreChart apply_heuristics(const ScoreChart& chart, const Sentence& sentence, const HeuristicConfig& config)
{
  if (!config.enabled)
    return chart;
  config.validate();
  if (chart.size() != sentence.size())
    throw Error(ErrorKind::LengthMismatch, "chart and sentence lengths differ");

  ScoreChart out = chart;
  const int n = sentence.size();
  const auto& tokens = sentence.tokens;

  if (config.comma_successor_word)
  {
    const std::string& w = *config.comma_successor_word;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (tokens[i] == w || tokens[j] == w)
          out(i, j) = 0.0;
  }

  if (config.common_start_word && n >= 2 && tokens[0] == *config.common_start_word &&
      config.stopword_set.count(lowercase(tokens[1])) == 0)
    out(0, 1) = 1.0;

  for (const Span& run : rare_capitalized_runs(sentence, config.top_frequency_set))
    for (int i = run.i; i <= run.j; ++i)
      for (int j = i + 1; j <= run.j; ++j)
        if (Span{i, j} != run)
          out(i, j) = 0.0;
  return out;
}

} // namespace spanboot
