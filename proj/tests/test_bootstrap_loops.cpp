#include "spanboot/bootstrap_loops.hpp"
#include "spanboot/error.hpp"
#include "spanboot/pipeline.hpp"
#include "spanboot/synth.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace spanboot;

namespace
{

struct Fixture
{
  std::vector<Sentence> corpus;
  std::vector<Sentence> table;
  std::vector<LabeledSpanExample> seeds;
};

const Fixture& fixture()
{
  static const Fixture f = [] {
    Fixture out;
    SampleOptions options;
    options.max_len = 20;
    const auto golds = sample_corpus(load_grammar(SPANBOOT_DATA_DIR "/synthetic_grammar.json"), 250, 21, options);
    out.corpus = sentences_of(golds);
    const SeedSet seeds = generate_seeds(out.corpus, SeedConfig{});
    out.table = out.corpus;
    out.table.insert(out.table.end(), seeds.augmented.begin(), seeds.augmented.end());
    out.seeds = seeds.examples;
    return out;
  }();
  return f;
}

LoopConfig small_config(int iterations)
{
  LoopConfig c;
  c.iterations = iterations;
  c.c = 200;
  c.d = 600;
  c.thresholds = Thresholds{0.1, 0.7};
  c.rng_seed = 5;
  c.train.space = FeatureSpace{14};
  c.train.max_epochs = 5;
  return c;
}

bool satisfies(const Scorer& model, const std::vector<Sentence>& table, const LabeledSpanExample& e,
               const Thresholds& t)
{
  const double s = model.score(lookup(table, e.sentence_id), e.span);
  return e.label == 1 ? s > t.tau_max : s < t.tau_min;
}

} // namespace

TEST(LoopConfig, Validation)
{
  LoopConfig c;
  c.iterations = 0;
  EXPECT_THROW(c.validate(), Error);
  c = LoopConfig{};
  c.pool_cap = 0;
  EXPECT_THROW(c.validate(), Error);
  c = LoopConfig{};
  c.thresholds = Thresholds{0.6, 0.4};
  EXPECT_THROW(c.validate(), Error);
}

TEST(SelfTrain, ReplacementKeepsOnlyConfidentPicks)
{
  const Fixture& f = fixture();
  const LoopConfig config = small_config(1);
  const LoopResult r = self_train(f.seeds, f.table, f.corpus, config);
  ASSERT_FALSE(r.inside_set.empty());
  // With K = 1 the returned inside model is the one that made the selection.
  for (const auto& e : r.inside_set)
    EXPECT_TRUE(satisfies(r.inside, f.table, e, config.thresholds));
  EXPECT_LE(class_balance(r.inside_set).constituents, config.c);
  EXPECT_LE(class_balance(r.inside_set).distituents, config.d);
  ASSERT_EQ(r.outside_set.size(), r.inside_set.size());
  for (std::size_t k = 0; k < r.outside_set.size(); ++k)
  {
    EXPECT_EQ(r.outside_set[k].view, View::Outside);
    EXPECT_EQ(r.outside_set[k].span, r.inside_set[k].span);
    EXPECT_EQ(r.outside_set[k].label, r.inside_set[k].label);
  }
  EXPECT_EQ(r.outside.view(), FeatureView::Outside);
}

TEST(SelfTrain, ZeroPicksSurfaceSingleClassInput)
{
  const Fixture& f = fixture();
  LoopConfig config = small_config(1);
  config.c = 0;
  config.d = 0;
  try
  {
    self_train(f.seeds, f.table, f.corpus, config);
    FAIL();
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::SingleClassInput);
  }
}

TEST(SelfTrain, TraceAndDeterminism)
{
  const Fixture& f = fixture();
  const LoopConfig config = small_config(3);
  int calls = 0;
  const MetricsCallback metrics = [&](int k, const SpanScorer&, const SpanScorer* outside) {
    ++calls;
    EXPECT_EQ(outside, nullptr);
    return std::map<std::string, double>{{"k", k}};
  };
  const LoopResult a = self_train(f.seeds, f.table, f.corpus, config, metrics);
  const LoopResult b = self_train(f.seeds, f.table, f.corpus, config);
  EXPECT_EQ(calls, 3);
  ASSERT_EQ(a.trace.records.size(), 3u);
  EXPECT_EQ(a.trace.records[2].metrics.at("k"), 3.0);
  EXPECT_EQ(serialize_model(a.inside), serialize_model(b.inside));
  EXPECT_EQ(serialize_model(a.outside), serialize_model(b.outside));
  EXPECT_EQ(a.inside_set, b.inside_set);

  LoopTrace without_metrics = a.trace;
  for (auto& r : without_metrics.records)
    r.metrics.clear();
  EXPECT_EQ(format_trace(without_metrics), format_trace(b.trace));
}

TEST(SelfTrain, AccumulateGrowsTheSet)
{
  const Fixture& f = fixture();
  LoopConfig config = small_config(2);
  config.accumulate_self_train = true;
  const LoopResult r = self_train(f.seeds, f.table, f.corpus, config);
  EXPECT_GT(r.inside_set.size(), f.seeds.size());
  EXPECT_TRUE(std::equal(f.seeds.begin(), f.seeds.end(), r.inside_set.begin()));
}

TEST(CoTrain, GrowthBoundedAndPicksConfident)
{
  const Fixture& f = fixture();
  const LoopConfig self_config = small_config(1);
  const LoopResult self = self_train(f.seeds, f.table, f.corpus, self_config);

  const LoopConfig config = small_config(2);
  const LoopResult r = co_train(self.inside_set, self.outside_set, f.table, f.corpus, config);
  ASSERT_EQ(r.trace.records.size(), 2u);
  std::size_t prev_in = self.inside_set.size(), prev_out = self.outside_set.size();
  for (const auto& rec : r.trace.records)
  {
    EXPECT_GE(rec.inside_size, prev_in);
    EXPECT_GE(rec.outside_size, prev_out);
    EXPECT_LE(rec.inside_size - prev_in, config.c + config.d);
    EXPECT_LE(rec.outside_size - prev_out, config.c + config.d);
    prev_in = rec.inside_size;
    prev_out = rec.outside_size;
    ASSERT_TRUE(rec.inside_pools && rec.outside_pools);
  }
  std::set<std::tuple<std::int64_t, Span>> seen;
  for (const auto& e : r.inside_set)
  {
    EXPECT_EQ(e.view, View::Inside);
    EXPECT_TRUE(seen.insert({e.sentence_id, e.span}).second);
  }
  for (const auto& e : r.outside_set)
    EXPECT_EQ(e.view, View::Outside);
  // Seeds are kept under union semantics.
  EXPECT_TRUE(std::equal(self.inside_set.begin(), self.inside_set.end(), r.inside_set.begin()));
}

TEST(CoTrain, SingleIterationPicksSatisfyThresholds)
{
  const Fixture& f = fixture();
  const LoopResult self = self_train(f.seeds, f.table, f.corpus, small_config(1));
  const LoopConfig config = small_config(1);
  const LoopResult r = co_train(self.inside_set, self.outside_set, f.table, f.corpus, config);
  // O's new examples were picked by the returned inside model's predecessor, which is the returned one at K = 1.
  for (std::size_t k = self.outside_set.size(); k < r.outside_set.size(); ++k)
    EXPECT_TRUE(satisfies(r.inside, f.table, r.outside_set[k], config.thresholds));
}

TEST(Concat, FeatureDimensionAndDedup)
{
  const Fixture& f = fixture();
  TrainOptions options;
  options.space = FeatureSpace{12};
  const auto outside = with_view(f.seeds, View::Outside);
  const SpanScorer model = concat_baseline(f.seeds, outside, f.table, options);
  EXPECT_EQ(model.view(), FeatureView::Concat);
  EXPECT_EQ(model.weights().size(), 2 * options.space.block_dim());
  EXPECT_EQ(model.meta().example_count, f.seeds.size());
}

TEST(MergeExamples, SkipsKnownSpans)
{
  std::vector<LabeledSpanExample> target{{0, {0, 1}, 1, View::Inside}};
  const std::vector<LabeledSpanExample> extra{
      {0, {0, 1}, 0, View::Inside}, {0, {1, 2}, 0, View::Inside}, {0, {1, 2}, 1, View::Inside}};
  EXPECT_EQ(merge_examples(target, extra), 1u);
  EXPECT_EQ(target.size(), 2u);
  EXPECT_EQ(target[1].label, 0);
}

TEST(Trace, RoundTrip)
{
  LoopTrace trace;
  IterationRecord r;
  r.loop = "co_train";
  r.iteration = 2;
  r.inside_size = 10;
  r.outside_size = 12;
  r.inside_pools = PoolStats{5, 6, 3, 4, false};
  r.metrics["f1"] = 0.625;
  trace.records.push_back(r);
  trace.warnings.push_back("PoolExhausted: x");
  const std::string text = format_trace(trace);
  const LoopTrace back = parse_trace(text);
  EXPECT_EQ(format_trace(back), text);
  ASSERT_EQ(back.records.size(), 1u);
  EXPECT_EQ(back.records[0].metrics.at("f1"), 0.625);
  EXPECT_FALSE(back.records[0].outside_pools.has_value());
  EXPECT_THROW(parse_trace("{\"record\":\"bogus\"}\n"), Error);
}

TEST(SeedEvaluator, ScoresHeldOutSeeds)
{
  const Fixture& f = fixture();
  TrainOptions options;
  options.space = FeatureSpace{12};
  const SeedEvaluator eval = seed_validation_evaluator(f.corpus, options);
  const double a = eval(SeedConfig{});
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
  EXPECT_EQ(a, eval(SeedConfig{}));
}
