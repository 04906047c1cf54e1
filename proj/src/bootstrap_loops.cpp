#include "spanboot/bootstrap_loops.hpp"

#include "spanboot/error.hpp"
#include "spanboot/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace spanboot
{

void LoopConfig::validate() const
{
  if (iterations < 1)
    throw Error(ErrorKind::InvalidConfig, "iteration count K must be >= 1");
  if (pool_cap < 1)
    throw Error(ErrorKind::InvalidConfig, "pool_cap must be >= 1");
  if (min_span_len < 1)
    throw Error(ErrorKind::InvalidConfig, "min_span_len must be >= 1");
  thresholds.validate();
  train.validate();
}

namespace
{

// Stream ids for mix_seed, so that every stochastic step draws from its own
// generator.
enum Stream : std::uint64_t
{
  kTrainInside = 1,
  kTrainOutside = 2,
  kSelectInside = 3,
  kSelectOutside = 4,
};

std::uint64_t step_seed(std::uint64_t seed, int iteration, Stream stream)
{
  return mix_seed(seed, static_cast<std::uint64_t>(iteration) * 16 + stream);
}

TrainOptions train_options(const LoopConfig& config, int iteration, Stream stream)
{
  TrainOptions options = config.train;
  options.rng_seed = step_seed(config.rng_seed, iteration, stream);
  return options;
}

std::span<const Sentence> capped(std::span<const Sentence> unlabeled, std::size_t cap)
{
  return unlabeled.first(std::min(cap, unlabeled.size()));
}

void check_unlabeled(std::span<const Sentence> table, std::span<const Sentence> unlabeled)
{
  if (unlabeled.empty())
    throw Error(ErrorKind::EmptyCorpus, "unlabeled corpus is empty");
  for (const auto& s : unlabeled)
    if (lookup(table, s.id).tokens != s.tokens)
      throw Error(ErrorKind::Format, "unlabeled sentence " + std::to_string(s.id) + " disagrees with the sentence table");
}

PoolStats stats(const Selection& selection, const LoopConfig& config)
{
  PoolStats out;
  out.constituent_pool = selection.constituent_pool;
  out.distituent_pool = selection.distituent_pool;
  out.selected_constituents = selection.constituents.size();
  out.selected_distituents = selection.distituents.size();
  out.exhausted = selection.constituent_pool < config.c || selection.distituent_pool < config.d;
  return out;
}

void note_exhaustion(LoopTrace& trace, const IterationRecord& record, const std::optional<PoolStats>& pools,
                     std::string_view which, const LoopConfig& config)
{
  if (!pools || !pools->exhausted)
    return;
  std::ostringstream msg;
  msg << "PoolExhausted: " << record.loop << " iteration " << record.iteration << ", " << which << " model pools "
      << pools->constituent_pool << "/" << pools->distituent_pool << " below requested " << config.c << "/"
      << config.d;
  trace.warnings.push_back(msg.str());
}

std::vector<LabeledSpanExample> joined(const Selection& selection, View view)
{
  std::vector<LabeledSpanExample> out = selection.constituents;
  out.insert(out.end(), selection.distituents.begin(), selection.distituents.end());
  for (auto& e : out)
    e.view = view;
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

std::vector<LabeledSpanExample> with_view(std::span<const LabeledSpanExample> examples, View view)
{
  std::vector<LabeledSpanExample> out(examples.begin(), examples.end());
  for (auto& e : out)
    e.view = view;
  return out;
}

std::size_t merge_examples(std::vector<LabeledSpanExample>& target, std::span<const LabeledSpanExample> extra)
{
  std::set<std::tuple<std::int64_t, int, int>> seen;
  for (const auto& e : target)
    seen.emplace(e.sentence_id, e.span.i, e.span.j);
  std::size_t added = 0;
  for (const auto& e : extra)
  {
    if (seen.emplace(e.sentence_id, e.span.i, e.span.j).second)
    {
      target.push_back(e);
      ++added;
    }
  }
  return added;
}

LoopResult self_train(std::span<const LabeledSpanExample> inside, std::span<const Sentence> table,
                      std::span<const Sentence> unlabeled, const LoopConfig& config, const MetricsCallback& metrics)
{
  config.validate();
  check_unlabeled(table, unlabeled);
  const auto pool = capped(unlabeled, config.pool_cap);

  std::vector<LabeledSpanExample> current(inside.begin(), inside.end());
  std::optional<SpanScorer> m_in;
  LoopTrace trace;

  for (int k = 1; k <= config.iterations; ++k)
  {
    m_in = train(current, table, FeatureView::Inside, train_options(config, k, kTrainInside));
    const Selection selection = select_confident(*m_in, pool, config.thresholds, config.c, config.d,
                                                 step_seed(config.rng_seed, k, kSelectInside), View::Inside,
                                                 config.min_span_len);
    auto picked = joined(selection, View::Inside);
    if (config.accumulate_self_train)
      merge_examples(current, picked);
    else
      current = std::move(picked);

    IterationRecord record;
    record.loop = "self_train";
    record.iteration = k;
    record.inside_size = current.size();
    record.inside_pools = stats(selection, config);
    if (metrics)
      record.metrics = metrics(k, *m_in, nullptr);
    note_exhaustion(trace, record, record.inside_pools, "inside", config);
    trace.records.push_back(std::move(record));
  }

  auto outside_set = with_view(current, View::Outside);
  SpanScorer m_out = train(outside_set, table, FeatureView::Outside, train_options(config, 0, kTrainOutside));
  trace.records.back().outside_size = outside_set.size();
  return LoopResult{std::move(*m_in), std::move(m_out), std::move(trace), std::move(current), std::move(outside_set)};
}

LoopResult co_train(std::span<const LabeledSpanExample> inside, std::span<const LabeledSpanExample> outside,
                    std::span<const Sentence> table, std::span<const Sentence> unlabeled, const LoopConfig& config,
                    const MetricsCallback& metrics)
{
  config.validate();
  check_unlabeled(table, unlabeled);
  const auto pool = capped(unlabeled, config.pool_cap);

  std::vector<LabeledSpanExample> in_set = with_view(inside, View::Inside);
  std::vector<LabeledSpanExample> out_set = with_view(outside, View::Outside);
  SpanScorer m_out = train(out_set, table, FeatureView::Outside, train_options(config, 0, kTrainOutside));
  std::optional<SpanScorer> m_in;
  LoopTrace trace;

  for (int k = 1; k <= config.iterations; ++k)
  {
    const Selection from_outside = select_confident(m_out, pool, config.thresholds, config.c, config.d,
                                                    step_seed(config.rng_seed, k, kSelectOutside), View::Inside,
                                                    config.min_span_len);
    merge_examples(in_set, joined(from_outside, View::Inside));
    m_in = train(in_set, table, FeatureView::Inside, train_options(config, k, kTrainInside));

    const Selection from_inside = select_confident(*m_in, pool, config.thresholds, config.c, config.d,
                                                   step_seed(config.rng_seed, k, kSelectInside), View::Outside,
                                                   config.min_span_len);
    merge_examples(out_set, joined(from_inside, View::Outside));
    m_out = train(out_set, table, FeatureView::Outside, train_options(config, k, kTrainOutside));

    IterationRecord record;
    record.loop = "co_train";
    record.iteration = k;
    record.inside_size = in_set.size();
    record.outside_size = out_set.size();
    record.inside_pools = stats(from_inside, config);
    record.outside_pools = stats(from_outside, config);
    if (metrics)
      record.metrics = metrics(k, *m_in, &m_out);
    note_exhaustion(trace, record, record.outside_pools, "outside", config);
    note_exhaustion(trace, record, record.inside_pools, "inside", config);
    trace.records.push_back(std::move(record));
  }

  return LoopResult{std::move(*m_in), std::move(m_out), std::move(trace), std::move(in_set), std::move(out_set)};
}

SpanScorer concat_baseline(std::span<const LabeledSpanExample> inside, std::span<const LabeledSpanExample> outside,
                           std::span<const Sentence> table, const TrainOptions& options)
{
  std::vector<LabeledSpanExample> examples = with_view(inside, View::Inside);
  merge_examples(examples, with_view(outside, View::Inside));
  return train(examples, table, FeatureView::Concat, options);
}

SeedEvaluator seed_validation_evaluator(std::span<const Sentence> corpus, const TrainOptions& options)
{
  std::vector<Sentence> sentences(corpus.begin(), corpus.end());
  return [sentences = std::move(sentences), options](const SeedConfig& config) {
    SeedSet seeds = generate_seeds(sentences, config);
    std::vector<Sentence> table = sentences;
    table.insert(table.end(), seeds.augmented.begin(), seeds.augmented.end());

    Rng rng(options.rng_seed);
    shuffle(seeds.examples, rng);
    const auto n_val = static_cast<std::size_t>(options.validation_fraction * static_cast<double>(seeds.examples.size()));
    if (n_val == 0 || n_val >= seeds.examples.size())
      throw Error(ErrorKind::InvalidConfig, "too few seeds for a validation split");
    const std::span<const LabeledSpanExample> all(seeds.examples);
    const auto held_out = all.first(n_val);
    const auto rest = all.subspan(n_val);

    TrainOptions inner = options;
    inner.rng_seed = mix_seed(options.rng_seed, 1);
    const SpanScorer model = train(rest, table, FeatureView::Inside, inner);
    std::vector<int> predictions, labels;
    for (const auto& e : held_out)
    {
      predictions.push_back(model.score(lookup(table, e.sentence_id), e.span) > 0.5 ? 1 : 0);
      labels.push_back(e.label);
    }
    return binary_f1(predictions, labels);
  };
}

// ---------------------------------------------------------------------------
// Trace files

namespace
{

nlohmann::ordered_json pools_json(const PoolStats& p)
{
  return {{"constituent_pool", p.constituent_pool},
          {"distituent_pool", p.distituent_pool},
          {"selected_constituents", p.selected_constituents},
          {"selected_distituents", p.selected_distituents},
          {"exhausted", p.exhausted}};
}

PoolStats parse_pools(const nlohmann::json& j)
{
  return PoolStats{j.at("constituent_pool").get<std::size_t>(), j.at("distituent_pool").get<std::size_t>(),
                   j.at("selected_constituents").get<std::size_t>(), j.at("selected_distituents").get<std::size_t>(),
                   j.at("exhausted").get<bool>()};
}

} // namespace

std::string format_trace(const LoopTrace& trace)
{
  std::string out;
  for (const auto& r : trace.records)
  {
    nlohmann::ordered_json j;
    j["record"] = "iteration";
    j["loop"] = r.loop;
    j["iteration"] = r.iteration;
    j["inside_size"] = r.inside_size;
    j["outside_size"] = r.outside_size;
    if (r.inside_pools)
      j["inside_pools"] = pools_json(*r.inside_pools);
    if (r.outside_pools)
      j["outside_pools"] = pools_json(*r.outside_pools);
    j["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : r.metrics)
      j["metrics"][name] = value;
    out += j.dump() + "\n";
  }
  for (const auto& w : trace.warnings)
  {
    nlohmann::ordered_json j;
    j["record"] = "warning";
    j["message"] = w;
    out += j.dump() + "\n";
  }
  return out;
}

LoopTrace parse_trace(std::string_view text)
{
  LoopTrace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try
    {
      const auto j = nlohmann::json::parse(line);
      const auto kind = j.at("record").get<std::string>();
      if (kind == "warning")
      {
        trace.warnings.push_back(j.at("message").get<std::string>());
        continue;
      }
      if (kind != "iteration")
        throw Error(ErrorKind::Format, "unknown record kind '" + kind + "'");
      IterationRecord r;
      r.loop = j.at("loop").get<std::string>();
      r.iteration = j.at("iteration").get<int>();
      r.inside_size = j.at("inside_size").get<std::size_t>();
      r.outside_size = j.at("outside_size").get<std::size_t>();
      if (j.contains("inside_pools"))
        r.inside_pools = parse_pools(j.at("inside_pools"));
      if (j.contains("outside_pools"))
        r.outside_pools = parse_pools(j.at("outside_pools"));
      for (const auto& [name, value] : j.at("metrics").items())
        r.metrics[name] = value.get<double>();
      trace.records.push_back(std::move(r));
    }
    catch (const nlohmann::json::exception& e)
    {
      throw Error(ErrorKind::Format, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

} // namespace spanboot
