#include "spanboot/eval.hpp"

#include "spanboot/decoder.hpp"
#include "spanboot/error.hpp"
#include "spanboot/random.hpp"
#include "spanboot/score_chart.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace spanboot
{

std::string_view to_string(EvalMode mode)
{
  switch (mode)
  {
  case EvalMode::MacroSentence:
    return "macro_sentence";
  case EvalMode::MicroCorpus:
    return "micro_corpus";
  case EvalMode::EvalbStyle:
    return "evalb_style";
  }
  return "unknown";
}

EvalMode parse_eval_mode(std::string_view text)
{
  if (text == "macro_sentence" || text == "macro")
    return EvalMode::MacroSentence;
  if (text == "micro_corpus" || text == "micro")
    return EvalMode::MicroCorpus;
  if (text == "evalb_style" || text == "evalb")
    return EvalMode::EvalbStyle;
  throw Error(ErrorKind::InvalidConfig, "unknown eval mode '" + std::string(text) + "'");
}

void EvalConfig::validate() const
{
  if (bucket_width < 1)
    throw Error(ErrorKind::InvalidConfig, "bucket_width must be >= 1");
  if (max_len && *max_len < 1)
    throw Error(ErrorKind::InvalidConfig, "max_len must be >= 1");
  if (cutoff_len && *cutoff_len < 1)
    throw Error(ErrorKind::InvalidConfig, "cutoff_len must be >= 1");
  if (mode == EvalMode::EvalbStyle && (dedup_spans || exclude_trivial))
    throw Error(ErrorKind::InvalidConfig, "evalb_style counts duplicated and whole-sentence spans");
}

EvalConfig EvalConfig::evalb()
{
  EvalConfig config;
  config.mode = EvalMode::EvalbStyle;
  config.exclude_trivial = false;
  config.dedup_spans = false;
  config.cutoff_len = 10;
  return config;
}

namespace
{

bool trivial(const Span& s, int n)
{
  return s.length() == 1 || s == Span{0, n - 1};
}

// Sorted span list; a multiset unless dedup.
SpanSet predicted_spans(const BinaryTree& pred, const EvalConfig& config)
{
  const int n = pred.sentence.size();
  SpanSet out;
  for (const auto& s : pred.spans)
    if (!(config.exclude_trivial && trivial(s, n)))
      out.push_back(s);
  if (config.dedup_spans)
    sort_unique(out);
  else
    std::sort(out.begin(), out.end());
  return out;
}

SpanSet reference_spans(const GoldTree& gold, const EvalConfig& config)
{
  const int n = gold.sentence.size();
  SpanSet out;
  for (const auto& ls : labeled_spans(gold))
    if (!(config.exclude_trivial && trivial(ls.span, n)))
      out.push_back(ls.span);
  if (config.dedup_spans)
    sort_unique(out);
  else
    std::sort(out.begin(), out.end());
  return out;
}

// Size of the multiset intersection of two sorted lists.
std::size_t overlap(const SpanSet& a, const SpanSet& b)
{
  std::size_t count = 0;
  auto x = a.begin();
  auto y = b.begin();
  while (x != a.end() && y != b.end())
  {
    if (*x < *y)
      ++x;
    else if (*y < *x)
      ++y;
    else
    {
      ++count;
      ++x;
      ++y;
    }
  }
  return count;
}

double ratio(std::size_t num, std::size_t den)
{
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r)
{
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

void check_yield(const BinaryTree& pred, const GoldTree& gold)
{
  if (pred.sentence.tokens != gold.sentence.tokens)
    throw Error(ErrorKind::YieldMismatch, "prediction and gold yields differ for sentence " +
                                              std::to_string(gold.sentence.id));
}

struct Aggregate
{
  double f1 = 0.0, precision = 0.0, recall = 0.0;
};

Aggregate aggregate(std::span<const SentenceScore* const> scores, EvalMode mode)
{
  Aggregate out;
  if (scores.empty())
    return out;
  if (mode == EvalMode::MacroSentence)
  {
    for (const auto* s : scores)
    {
      out.f1 += s->f1;
      out.precision += s->precision;
      out.recall += s->recall;
    }
    const auto n = static_cast<double>(scores.size());
    out.f1 /= n;
    out.precision /= n;
    out.recall /= n;
    return out;
  }
  std::size_t matched = 0, predicted = 0, gold = 0;
  for (const auto* s : scores)
  {
    matched += s->matched;
    predicted += s->predicted;
    gold += s->gold;
  }
  out.precision = ratio(matched, predicted);
  out.recall = ratio(matched, gold);
  out.f1 = harmonic(out.precision, out.recall);
  return out;
}

} // namespace

SentenceScore score_sentence(const BinaryTree& pred, const GoldTree& gold, const EvalConfig& config)
{
  check_yield(pred, gold);
  const SpanSet p = predicted_spans(pred, config);
  const SpanSet g = reference_spans(gold, config);
  SentenceScore out;
  out.length = gold.sentence.size();
  out.matched = overlap(p, g);
  out.predicted = p.size();
  out.gold = g.size();
  out.precision = ratio(out.matched, out.predicted);
  out.recall = ratio(out.matched, out.gold);
  out.f1 = harmonic(out.precision, out.recall);
  return out;
}

double sentence_f1(const BinaryTree& pred, const GoldTree& gold, const EvalConfig& config)
{
  return score_sentence(pred, gold, config).f1;
}

std::map<std::string, double> label_recall(std::span<const BinaryTree> preds, std::span<const GoldTree> golds,
                                           const EvalConfig& config)
{
  if (preds.size() != golds.size())
    throw Error(ErrorKind::LengthMismatch, "prediction and gold lists differ in length");
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts; // found, total
  for (std::size_t k = 0; k < golds.size(); ++k)
  {
    const int n = golds[k].sentence.size();
    if (config.max_len && n > *config.max_len)
      continue;
    const SpanSet& pred = preds[k].spans;
    for (const auto& ls : labeled_spans(golds[k]))
    {
      if (ls.label.empty() || (config.exclude_trivial && trivial(ls.span, n)))
        continue;
      const std::string label = config.strip_function_tags ? strip_function_tags(ls.label) : ls.label;
      auto& [found, total] = counts[label];
      ++total;
      found += std::find(pred.begin(), pred.end(), ls.span) != pred.end();
    }
  }
  std::map<std::string, double> out;
  for (const auto& [label, c] : counts)
    out[label] = static_cast<double>(c.first) / static_cast<double>(c.second);
  return out;
}

EvalReport corpus_eval(std::span<const BinaryTree> preds, std::span<const GoldTree> golds, const EvalConfig& config)
{
  config.validate();
  if (preds.size() != golds.size())
    throw Error(ErrorKind::LengthMismatch, "prediction and gold lists differ in length (" +
                                               std::to_string(preds.size()) + " vs " + std::to_string(golds.size()) +
                                               ")");
  EvalReport report;
  report.mode = config.mode;
  std::vector<BinaryTree> kept_preds;
  std::vector<GoldTree> kept_golds;
  for (std::size_t k = 0; k < golds.size(); ++k)
  {
    if (config.max_len && golds[k].sentence.size() > *config.max_len)
      continue;
    if (preds[k].sentence.tokens != golds[k].sentence.tokens && config.skip_yield_mismatch)
    {
      report.yield_mismatches.push_back(k);
      continue;
    }
    SentenceScore score = score_sentence(preds[k], golds[k], config);
    score.index = k;
    report.per_sentence.push_back(score);
    kept_preds.push_back(preds[k]);
    kept_golds.push_back(golds[k]);
  }

  std::vector<const SentenceScore*> all;
  for (const auto& s : report.per_sentence)
    all.push_back(&s);
  const Aggregate total = aggregate(all, config.mode);
  report.f1 = total.f1;
  report.precision = total.precision;
  report.recall = total.recall;

  std::map<int, std::vector<const SentenceScore*>> buckets;
  for (const auto* s : all)
    buckets[(s->length - 1) / config.bucket_width].push_back(s);
  for (const auto& [b, members] : buckets)
  {
    BucketScore bucket;
    bucket.first = b * config.bucket_width + 1;
    bucket.last = (b + 1) * config.bucket_width;
    bucket.count = members.size();
    bucket.f1 = aggregate(members, config.mode).f1;
    report.length_buckets.push_back(bucket);
  }

  if (config.cutoff_len)
  {
    std::vector<const SentenceScore*> short_ones;
    for (const auto* s : all)
      if (s->length <= *config.cutoff_len)
        short_ones.push_back(s);
    report.cutoff_f1 = aggregate(short_ones, config.mode).f1;
  }

  EvalConfig unlimited = config;
  unlimited.max_len.reset();
  report.per_label_recall = label_recall(kept_preds, kept_golds, unlimited);
  return report;
}

std::string_view to_string(Baseline baseline)
{
  switch (baseline)
  {
  case Baseline::Left:
    return "left_branching";
  case Baseline::Right:
    return "right_branching";
  case Baseline::Balanced:
    return "balanced";
  case Baseline::Random:
    return "random";
  }
  return "unknown";
}

std::vector<BinaryTree> baseline_trees(std::span<const GoldTree> golds, Baseline which, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<BinaryTree> out;
  out.reserve(golds.size());
  for (const auto& g : golds)
  {
    const int n = g.sentence.size();
    SpanSet spans;
    switch (which)
    {
    case Baseline::Left:
      spans = left_branching(n);
      break;
    case Baseline::Right:
      spans = right_branching(n);
      break;
    case Baseline::Balanced:
      spans = balanced_tree(n);
      break;
    case Baseline::Random:
      spans = random_tree(n, rng);
      break;
    }
    out.push_back(BinaryTree{g.sentence, std::move(spans)});
  }
  return out;
}

EvalReport trivial_baseline(std::span<const GoldTree> golds, Baseline which, const EvalConfig& config,
                            std::uint64_t seed)
{
  const auto trees = baseline_trees(golds, which, seed);
  return corpus_eval(trees, golds, config);
}

std::vector<BinaryTree> oracle_trees(std::span<const GoldTree> golds)
{
  std::vector<BinaryTree> out;
  out.reserve(golds.size());
  for (const auto& g : golds)
  {
    ScoreChart indicator(g.sentence.size());
    for (const auto& s : gold_spans(g, false))
      indicator(s.i, s.j) = 1.0;
    out.push_back(cyk_decode(indicator, g.sentence));
  }
  return out;
}

EvalReport oracle_binary(std::span<const GoldTree> golds, const EvalConfig& config)
{
  const auto trees = oracle_trees(golds);
  return corpus_eval(trees, golds, config);
}

// ---------------------------------------------------------------------------
// Report files

namespace
{

std::string fixed(double value)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

} // namespace

std::string format_summary(std::span<const ReportRow> rows)
{
  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows)
  {
    const EvalReport& r = row.report;
    nlohmann::ordered_json j;
    j["name"] = row.name;
    j["mode"] = to_string(r.mode);
    j["sentences"] = r.per_sentence.size();
    j["f1"] = r.f1;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    if (r.cutoff_f1)
      j["cutoff_f1"] = *r.cutoff_f1;
    j["yield_mismatches"] = r.yield_mismatches.size();
    j["label_recall"] = nlohmann::ordered_json::object();
    for (const auto& [label, value] : r.per_label_recall)
      j["label_recall"][label] = value;
    doc["rows"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string format_score_table(const EvalReport& report)
{
  std::ostringstream out;
  out << "index\tlength\tmatched\tpredicted\tgold\tprecision\trecall\tf1\n";
  for (const auto& s : report.per_sentence)
    out << s.index << '\t' << s.length << '\t' << s.matched << '\t' << s.predicted << '\t' << s.gold << '\t'
        << fixed(s.precision) << '\t' << fixed(s.recall) << '\t' << fixed(s.f1) << '\n';
  return out.str();
}

std::string format_bucket_table(const EvalReport& report)
{
  std::ostringstream out;
  out << "first\tlast\tcount\tf1\n";
  for (const auto& b : report.length_buckets)
    out << b.first << '\t' << b.last << '\t' << b.count << '\t' << fixed(b.f1) << '\n';
  return out.str();
}

std::vector<BinaryTree> read_predictions(std::string_view text)
{
  std::vector<BinaryTree> out;
  std::size_t start = 0;
  while (start < text.size())
  {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    const auto line = text.substr(start, end - start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos)
      out.push_back(parse_binary_tree(line, static_cast<std::int64_t>(out.size())));
    start = end + 1;
  }
  return out;
}

} // namespace spanboot
