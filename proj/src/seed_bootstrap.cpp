#include "spanboot/seed_bootstrap.hpp"

#include "spanboot/error.hpp"
#include "spanboot/random.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace spanboot
{

std::string_view to_string(View view)
{
  return view == View::Inside ? "inside" : "outside";
}

View parse_view(std::string_view text)
{
  if (text == "inside")
    return View::Inside;
  if (text == "outside")
    return View::Outside;
  throw Error(ErrorKind::Format, "unknown view '" + std::string(text) + "'");
}

const Sentence& lookup(std::span<const Sentence> table, std::int64_t id)
{
  if (id < 0 || id >= static_cast<std::int64_t>(table.size()) || table[id].id != id)
    throw Error(ErrorKind::Format, "sentence id " + std::to_string(id) + " is not in the sentence table");
  return table[id];
}

void SeedConfig::validate() const
{
  if (num_slices < 1)
    throw Error(ErrorKind::InvalidConfig, "num_slices must be >= 1");
  if (min_span_len < 2)
    throw Error(ErrorKind::InvalidConfig, "min_span_len must be >= 2");
  if (lowercase_copy_label != 0 && lowercase_copy_label != 1)
    throw Error(ErrorKind::InvalidConfig, "lowercase_copy_label must be 0 or 1");
}

bool is_title_case(std::string_view token)
{
  return !token.empty() && token.front() >= 'A' && token.front() <= 'Z';
}

namespace
{

bool has_apostrophe(std::string_view token)
{
  return token.find('\'') != std::string_view::npos;
}

std::string lowercase(std::string_view token)
{
  std::string out(token);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

} // namespace

std::vector<Span> title_case_runs(const Sentence& sentence)
{
  std::vector<Span> runs;
  const int n = sentence.size();
  int k = 0;
  while (k < n)
  {
    if (!is_title_case(sentence.tokens[k]))
    {
      ++k;
      continue;
    }
    int end = k;
    while (end + 1 < n && (is_title_case(sentence.tokens[end + 1]) || has_apostrophe(sentence.tokens[end + 1])))
      ++end;
    if (end > k)
      runs.push_back(Span{k, end});
    k = end + 1;
  }
  return runs;
}

std::string most_common_first_word(std::span<const Sentence> corpus)
{
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus)
    if (!s.tokens.empty())
      ++counts[s.tokens.front()];
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [word, count] : counts) // ordered: first maximum is lexicographically smallest
  {
    if (count > best_count)
    {
      best = word;
      best_count = count;
    }
  }
  return best;
}

SeedSet generate_seeds(std::span<const Sentence> corpus, const SeedConfig& config)
{
  config.validate();
  if (corpus.empty())
    throw Error(ErrorKind::EmptyCorpus, "cannot bootstrap seeds from an empty corpus");

  SeedSet out;
  Rng rng(config.rng_seed);
  const std::string first_word = config.casing_augmentation ? most_common_first_word(corpus) : std::string{};
  std::int64_t next_id = static_cast<std::int64_t>(corpus.size());

  for (std::size_t index = 0; index < corpus.size(); ++index)
  {
    const Sentence& sentence = corpus[index];
    if (sentence.id != static_cast<std::int64_t>(index))
      throw Error(ErrorKind::Format, "corpus ids must be 0..N-1 in order");
    const int n = sentence.size();

    std::vector<Span> constituents{Span{0, n - 1}};
    std::vector<Span> distituents;

    auto add_distituent = [&](Span span) {
      if (span.length() >= config.min_span_len)
        distituents.push_back(span);
    };
    if (config.distituent_mode == DistituentMode::Template)
    {
      for (int k = 1; k <= config.num_slices && k < n; ++k)
        add_distituent(config.branching == Branching::Right ? Span{0, n - 1 - k} : Span{k, n - 1});
    }
    else if (n >= 2)
    {
      // A slice (start:r) with r uniform in [start+1, end-1].
      for (int draw = 0; draw < config.num_slices; ++draw)
      {
        const int r = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - 1)));
        add_distituent(config.branching == Branching::Right ? Span{0, r - 1} : Span{r, n - 1});
      }
    }

    if (config.star_split)
    {
      // Fragments between "*" marks; a sentence without marks adds nothing.
      int start = 0;
      for (int k = 0; k <= n; ++k)
      {
        if (k == n || sentence.tokens[k] == "*")
        {
          if (k - start >= config.min_span_len && (start > 0 || k < n))
            constituents.push_back(Span{start, k - 1});
          start = k + 1;
        }
      }
    }

    std::vector<Span> lowered_runs;
    if (config.casing_augmentation)
    {
      for (const Span& run : title_case_runs(sentence))
      {
        if (run.length() < config.min_span_len)
          continue;
        constituents.push_back(run);
        if (sentence.tokens[run.i] == first_word)
          lowered_runs.push_back(run);
      }
    }

    // Stable de-duplication, constituents first.
    std::vector<Span> seen;
    for (const Span& span : constituents)
    {
      if (std::find(seen.begin(), seen.end(), span) != seen.end())
        continue;
      seen.push_back(span);
      out.examples.push_back(LabeledSpanExample{sentence.id, span, 1, View::Inside});
    }
    for (const Span& span : distituents)
    {
      if (std::find(seen.begin(), seen.end(), span) != seen.end())
        continue;
      seen.push_back(span);
      out.examples.push_back(LabeledSpanExample{sentence.id, span, 0, View::Inside});
    }

    for (const Span& run : lowered_runs)
    {
      std::vector<std::string> tokens;
      for (int k = run.i; k <= run.j; ++k)
        tokens.push_back(lowercase(sentence.tokens[k]));
      const int len = static_cast<int>(tokens.size());
      out.augmented.push_back(Sentence{next_id, std::move(tokens)});
      out.examples.push_back(LabeledSpanExample{next_id, Span{0, len - 1}, config.lowercase_copy_label, View::Inside});
      ++next_id;
    }
  }
  return out;
}

ClassBalance class_balance(std::span<const LabeledSpanExample> examples)
{
  ClassBalance balance;
  for (const auto& e : examples)
    (e.label == 1 ? balance.constituents : balance.distituents)++;
  return balance;
}

SeedConfig tune_slice_count(const SeedConfig& start, const SeedEvaluator& evaluate, int max_slices)
{
  start.validate();
  SeedConfig best = start;
  double best_score = evaluate(best);

  auto climb = [&](int step) {
    bool moved = false;
    for (;;)
    {
      SeedConfig next = best;
      next.num_slices += step;
      if (next.num_slices < 1 || next.num_slices > max_slices)
        return moved;
      const double score = evaluate(next);
      if (!(score > best_score))
        return moved;
      best = next;
      best_score = score;
      moved = true;
    }
  };

  if (!climb(+1))
    climb(-1);
  return best;
}

// ---------------------------------------------------------------------------
// Files

namespace
{

template <typename Int>
Int parse_int(std::string_view field, std::size_t line_no)
{
  Int value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw Error(ErrorKind::Format, "line " + std::to_string(line_no) + ": bad integer '" + std::string(field) + "'");
  return value;
}

std::vector<std::string_view> split_tabs(std::string_view line)
{
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;)
  {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos)
      break;
    start = tab + 1;
  }
  return fields;
}

template <typename F>
void for_each_line(std::string_view text, F&& f)
{
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size())
  {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    ++line_no;
    if (!line.empty())
      f(line, line_no);
    start = end + 1;
  }
}

} // namespace

std::string format_seed_file(std::span<const LabeledSpanExample> examples)
{
  std::string out;
  for (const auto& e : examples)
  {
    out += std::to_string(e.sentence_id);
    out += '\t';
    out += std::to_string(e.span.i);
    out += '\t';
    out += std::to_string(e.span.j);
    out += '\t';
    out += std::to_string(e.label);
    out += '\t';
    out += to_string(e.view);
    out += '\n';
  }
  return out;
}

std::vector<LabeledSpanExample> parse_seed_file(std::string_view text)
{
  std::vector<LabeledSpanExample> examples;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_tabs(line);
    if (fields.size() != 5)
      throw Error(ErrorKind::Format, "seed line " + std::to_string(line_no) + ": expected 5 fields");
    LabeledSpanExample e;
    e.sentence_id = parse_int<std::int64_t>(fields[0], line_no);
    e.span.i = parse_int<int>(fields[1], line_no);
    e.span.j = parse_int<int>(fields[2], line_no);
    e.label = parse_int<int>(fields[3], line_no);
    e.view = parse_view(fields[4]);
    if (e.label != 0 && e.label != 1)
      throw Error(ErrorKind::Format, "seed line " + std::to_string(line_no) + ": label must be 0 or 1");
    if (e.span.i < 0 || e.span.j < e.span.i)
      throw Error(ErrorKind::Format, "seed line " + std::to_string(line_no) + ": invalid span");
    examples.push_back(e);
  });
  return examples;
}

std::string format_sentence_table(std::span<const Sentence> sentences)
{
  std::string out;
  for (const auto& s : sentences)
  {
    out += std::to_string(s.id);
    out += '\t';
    for (std::size_t k = 0; k < s.tokens.size(); ++k)
    {
      if (k)
        out += ' ';
      out += s.tokens[k];
    }
    out += '\n';
  }
  return out;
}

std::vector<Sentence> parse_sentence_table(std::string_view text)
{
  std::vector<Sentence> sentences;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw Error(ErrorKind::Format, "sentence line " + std::to_string(line_no) + ": missing tab");
    sentences.push_back(make_sentence(parse_int<std::int64_t>(line.substr(0, tab), line_no),
                                      split_tokens(line.substr(tab + 1))));
  });
  return sentences;
}

} // namespace spanboot
