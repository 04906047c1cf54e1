#include "spanboot/error.hpp"
#include "spanboot/external_scorer.hpp"
#include "spanboot/features.hpp"
#include "spanboot/random.hpp"
#include "spanboot/span_scorer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

using namespace spanboot;

namespace
{

// Fixed scores per (sentence id, span); 0.5 elsewhere.
class TableScorer final : public Scorer
{
public:
  std::map<std::pair<std::int64_t, Span>, double> table;

  double score(const Sentence& s, Span span) const override
  {
    const auto it = table.find({s.id, span});
    return it == table.end() ? 0.5 : it->second;
  }
};

bool same_vector(const FeatureVector& a, const FeatureVector& b)
{
  return (Eigen::VectorXd(a) - Eigen::VectorXd(b)).cwiseAbs().maxCoeff() == 0.0;
}

// Constituents contain "A", distituents "B"; filler tokens elsewhere.
struct ToyData
{
  std::vector<Sentence> sentences;
  std::vector<LabeledSpanExample> examples;
};

ToyData toy(int count, std::uint64_t seed)
{
  ToyData d;
  Rng rng(seed);
  const std::vector<std::string> filler{"x", "y", "z", "q"};
  for (int k = 0; k < count; ++k)
  {
    const int label = k % 2;
    std::vector<std::string> tokens;
    const int n = 3 + static_cast<int>(uniform_index(rng, 4));
    for (int t = 0; t < n; ++t)
      tokens.push_back(filler[uniform_index(rng, filler.size())]);
    tokens[uniform_index(rng, n)] = label ? "A" : "B";
    d.sentences.push_back(make_sentence(k, tokens));
    d.examples.push_back({k, {0, n - 1}, label, View::Inside});
  }
  return d;
}

} // namespace

// ---------------------------------------------------------------------------
// Features

TEST(Features, OutsideWholeSentenceUsesSentinelsOnly)
{
  const Sentence a = make_sentence(0, {"a", "b", "c"});
  const Sentence b = make_sentence(1, {"z"});
  const auto t = outside_triple(a, {0, 2});
  EXPECT_EQ(t.left, kBos);
  EXPECT_EQ(t.right, kEos);
  EXPECT_EQ(t.hole, kHole);
  EXPECT_TRUE(same_vector(featurize(a, {0, 2}, FeatureView::Outside), featurize(b, {0, 0}, FeatureView::Outside)));
}

TEST(Features, OutsideIdenticalTriplesAcrossSentences)
{
  const Sentence a = make_sentence(0, {"the", "big", "dog", "ran", "off"});
  const Sentence b = make_sentence(1, {"a", "the", "cat", "ran"});
  EXPECT_TRUE(same_vector(featurize(a, {1, 2}, FeatureView::Outside), featurize(b, {2, 2}, FeatureView::Outside)));
  EXPECT_FALSE(same_vector(featurize(a, {1, 2}, FeatureView::Outside), featurize(a, {1, 3}, FeatureView::Outside)));
}

TEST(Features, OutsideBlindToPermutationsInside)
{
  Rng rng(11);
  std::vector<std::string> tokens{"w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7"};
  for (int trial = 0; trial < 50; ++trial)
  {
    const int i = static_cast<int>(uniform_index(rng, 8));
    const int j = i + static_cast<int>(uniform_index(rng, 8 - i));
    std::vector<std::string> permuted = tokens;
    std::span<std::string> inner(permuted.data() + i, j - i + 1);
    shuffle(inner, rng);
    for (auto& t : inner)
      t += "'";
    EXPECT_TRUE(same_vector(featurize(make_sentence(0, tokens), {i, j}, FeatureView::Outside),
                            featurize(make_sentence(0, permuted), {i, j}, FeatureView::Outside)));
  }
}

TEST(Features, InsideReadsOnlyTheSpan)
{
  const Sentence a = make_sentence(0, {"p", "big", "dog", "q"});
  const Sentence b = make_sentence(1, {"big", "dog"});
  EXPECT_TRUE(same_vector(featurize(a, {1, 2}, FeatureView::Inside), featurize(b, {0, 1}, FeatureView::Inside)));
  const FeatureVector one = featurize(a, {1, 1}, FeatureView::Inside);
  EXPECT_GT(one.nonZeros(), 0);
}

TEST(Features, ConcatStacksBlocks)
{
  const FeatureSpace space{10};
  const Sentence s = make_sentence(0, {"a", "b", "c", "d"});
  const FeatureVector in = featurize(s, {1, 2}, FeatureView::Inside, space);
  const FeatureVector out = featurize(s, {1, 2}, FeatureView::Outside, space);
  const FeatureVector both = featurize(s, {1, 2}, FeatureView::Concat, space);
  ASSERT_EQ(both.size(), space.block_dim() * 2);
  EXPECT_EQ(space.dim(FeatureView::Concat), space.dim(FeatureView::Inside) + space.dim(FeatureView::Outside));
  const Eigen::VectorXd dense(both);
  EXPECT_EQ(dense.head(space.block_dim()), Eigen::VectorXd(in));
  EXPECT_EQ(dense.tail(space.block_dim()), Eigen::VectorXd(out));
}

TEST(Features, Fnv1aKnownValues)
{
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
}

// ---------------------------------------------------------------------------
// Model

TEST(SpanScorer, ZeroModelScoresHalf)
{
  const SpanScorer model(FeatureView::Inside, FeatureSpace{8});
  const Sentence s = make_sentence(0, {"a", "b", "c"});
  const ScoreChart chart = score_chart(model, s);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      EXPECT_DOUBLE_EQ(chart(i, j), 0.5);
}

TEST(SpanScorer, ProbabilityStrictlyInsideUnitInterval)
{
  SpanScorer model(FeatureView::Inside, FeatureSpace{6});
  model.weights().setConstant(1e6);
  const Sentence s = make_sentence(0, {"a", "b", "c"});
  EXPECT_LT(score_span(model, s, {0, 2}), 1.0);
  model.weights().setConstant(-1e6);
  EXPECT_GT(score_span(model, s, {0, 2}), 0.0);
}

TEST(Train, SeparableToySet)
{
  const ToyData d = toy(200, 1);
  TrainOptions options;
  options.rng_seed = 3;
  options.max_epochs = 60;
  options.learning_rate = 1.0;
  options.patience = 60;
  options.l2 = 0.0;
  options.space = FeatureSpace{12};
  const SpanScorer model = train(d.examples, d.sentences, FeatureView::Inside, options);

  const ToyData held = toy(100, 2);
  int correct = 0;
  for (const auto& e : held.examples)
  {
    const double p = score_span(model, held.sentences[e.sentence_id], e.span);
    correct += (p > 0.5) == (e.label == 1);
    if (e.label == 1)
    {
      EXPECT_GT(p, 0.9);
    }
  }
  EXPECT_EQ(correct, 100);
  EXPECT_EQ(model.meta().example_count, 200u);
}

TEST(Train, DeterministicBitForBit)
{
  const ToyData d = toy(120, 4);
  TrainOptions options;
  options.rng_seed = 17;
  options.space = FeatureSpace{10};
  const SpanScorer a = train(d.examples, d.sentences, FeatureView::Inside, options);
  const SpanScorer b = train(d.examples, d.sentences, FeatureView::Inside, options);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.bias(), b.bias());
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  options.rng_seed = 18;
  EXPECT_NE(serialize_model(train(d.examples, d.sentences, FeatureView::Inside, options)), serialize_model(a));
}

TEST(Train, SingleClassInput)
{
  ToyData d = toy(10, 5);
  for (auto& e : d.examples)
    e.label = 1;
  try
  {
    train(d.examples, d.sentences, FeatureView::Inside, TrainOptions{});
    FAIL();
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::SingleClassInput);
  }
  EXPECT_THROW(train(std::vector<LabeledSpanExample>{}, d.sentences, FeatureView::Inside, TrainOptions{}), Error);
}

TEST(Train, OptionValidation)
{
  TrainOptions o;
  o.max_epochs = 0;
  EXPECT_THROW(o.validate(), Error);
  o = TrainOptions{};
  o.validation_fraction = 1.0;
  EXPECT_THROW(o.validate(), Error);
  o = TrainOptions{};
  o.space.hash_bits = 40;
  EXPECT_THROW(o.validate(), Error);
}

TEST(ModelFile, RoundTrip)
{
  const ToyData d = toy(60, 6);
  TrainOptions options;
  options.space = FeatureSpace{9};
  const SpanScorer model = train(d.examples, d.sentences, FeatureView::Inside, options);
  const SpanScorer back = parse_model(serialize_model(model));
  EXPECT_EQ(back.view(), model.view());
  EXPECT_EQ(back.feature_space(), model.feature_space());
  EXPECT_EQ(back.weights(), model.weights());
  EXPECT_EQ(back.bias(), model.bias());
  EXPECT_EQ(back.meta().epochs, model.meta().epochs);
  EXPECT_EQ(serialize_model(back), serialize_model(model));
  EXPECT_THROW(parse_model("{\"format\":\"other\"}"), Error);
  EXPECT_THROW(parse_model("not json"), Error);
}

// ---------------------------------------------------------------------------
// Charts

TEST(ScoreChart, ProductAndRenormalization)
{
  ScoreChart in(1, 0.8), out(1, 0.5);
  EXPECT_DOUBLE_EQ(combine_charts(in, out, false)(0, 0), 0.4);
  EXPECT_DOUBLE_EQ(combine_charts(in, out, true)(0, 0), 0.8);
}

TEST(ScoreChart, ConstantOneOutsideIsIdentity)
{
  const ToyData d = toy(40, 7);
  TrainOptions options;
  options.space = FeatureSpace{10};
  const SpanScorer model = train(d.examples, d.sentences, FeatureView::Inside, options);
  const ConstantScorer one(1.0);
  for (const auto& s : d.sentences)
    EXPECT_EQ(score_chart(model, one, s).matrix(), score_chart(model, s).matrix());
}

// ---------------------------------------------------------------------------
// Selection

TEST(SelectConfident, PoolsFollowStrictThresholds)
{
  const std::vector<Sentence> corpus{make_sentence(0, {"a", "b", "c", "d"})};
  TableScorer scorer;
  scorer.table[{0, {0, 1}}] = 0.999;
  scorer.table[{0, {1, 2}}] = 0.0001;
  scorer.table[{0, {2, 3}}] = 0.5;
  scorer.table[{0, {0, 2}}] = 0.995;  // not strictly above
  scorer.table[{0, {1, 3}}] = 0.0005; // not strictly below
  scorer.table[{0, {0, 3}}] = 0.3;
  const Selection sel = select_confident(scorer, corpus, Thresholds{}, 10, 10, 1);
  ASSERT_EQ(sel.constituents.size(), 1u);
  ASSERT_EQ(sel.distituents.size(), 1u);
  EXPECT_EQ(sel.constituents[0].span, (Span{0, 1}));
  EXPECT_EQ(sel.constituents[0].label, 1);
  EXPECT_EQ(sel.distituents[0].span, (Span{1, 2}));
  EXPECT_EQ(sel.distituents[0].label, 0);
}

TEST(SelectConfident, TauMaxOneEmptiesConstituentPool)
{
  const std::vector<Sentence> corpus{make_sentence(0, {"a", "b", "c"})};
  const ConstantScorer one(1.0);
  const Selection sel = select_confident(one, corpus, Thresholds{0.0005, 1.0}, 5, 5, 1);
  EXPECT_EQ(sel.constituent_pool, 0u);
  EXPECT_TRUE(sel.constituents.empty());
}

TEST(SelectConfident, WholePoolWhenCExceedsIt)
{
  const std::vector<Sentence> corpus{make_sentence(0, {"a", "b", "c"})};
  const ConstantScorer high(0.9999);
  const Selection sel = select_confident(high, corpus, Thresholds{}, 10, 10, 1);
  EXPECT_EQ(sel.constituents.size(), 3u);
  std::set<Span> distinct;
  for (const auto& e : sel.constituents)
    distinct.insert(e.span);
  EXPECT_EQ(distinct, (std::set<Span>{{0, 1}, {0, 2}, {1, 2}}));
}

TEST(SelectConfident, SamplesAreDisjointSortedAndSeeded)
{
  std::vector<Sentence> corpus;
  TableScorer scorer;
  Rng rng(8);
  for (int s = 0; s < 30; ++s)
  {
    corpus.push_back(make_sentence(s, {"a", "b", "c", "d", "e", "f"}));
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j)
      {
        const double u = uniform_real(rng);
        scorer.table[{s, {i, j}}] = u < 0.3 ? 0.9999 : u < 0.6 ? 0.0001 : u;
      }
  }
  const Selection a = select_confident(scorer, corpus, Thresholds{}, 20, 25, 42, View::Outside);
  const Selection b = select_confident(scorer, corpus, Thresholds{}, 20, 25, 42, View::Outside);
  const Selection c = select_confident(scorer, corpus, Thresholds{}, 20, 25, 43, View::Outside);
  EXPECT_EQ(a.constituents, b.constituents);
  EXPECT_EQ(a.distituents, b.distituents);
  EXPECT_NE(a.constituents, c.constituents);
  EXPECT_EQ(a.constituents.size(), 20u);
  EXPECT_EQ(a.distituents.size(), 25u);
  EXPECT_TRUE(std::is_sorted(a.constituents.begin(), a.constituents.end()));
  std::set<std::pair<std::int64_t, Span>> seen;
  for (const auto* set : {&a.constituents, &a.distituents})
    for (const auto& e : *set)
    {
      EXPECT_EQ(e.view, View::Outside);
      EXPECT_TRUE(seen.insert({e.sentence_id, e.span}).second);
    }
}

// ---------------------------------------------------------------------------
// Metrics

TEST(Mcc, KnownValues)
{
  const std::vector<int> y{1, 1, 0, 0, 1};
  EXPECT_DOUBLE_EQ(compute_mcc(y, y).value, 1.0);
  const std::vector<int> inv{0, 0, 1, 1, 0};
  EXPECT_DOUBLE_EQ(compute_mcc(inv, y).value, -1.0);
  // TP=2, TN=1, FP=1, FN=0
  const std::vector<int> p{1, 1, 1, 0};
  const std::vector<int> l{1, 1, 0, 0};
  EXPECT_NEAR(compute_mcc(p, l).value, 2.0 / std::sqrt(12.0), 1e-12);
  const std::vector<int> ones{1, 1};
  EXPECT_TRUE(compute_mcc(ones, ones).undefined);
  EXPECT_THROW(compute_mcc(p, y), Error);
  EXPECT_NEAR(binary_f1(p, l), 0.8, 1e-12);
}

// ---------------------------------------------------------------------------
// External scorer

TEST(ExternalScorer, AnswersInOrder)
{
  const ExternalScorer scorer("while read -r line; do echo 0.25; done", View::Inside, std::chrono::seconds(5));
  const Sentence s = make_sentence(0, {"a", "b", "c"});
  EXPECT_DOUBLE_EQ(scorer.score(s, {0, 1}), 0.25);
  const ScoreChart chart = scorer.chart(s);
  EXPECT_DOUBLE_EQ(chart(1, 2), 0.25);
}

TEST(ExternalScorer, EchoesRequestFields)
{
  // Returns j / 10 as read back from the request line.
  const ExternalScorer scorer(
      "while read -r line; do j=$(echo \"$line\" | sed 's/.*\"j\":\\([0-9]*\\).*/\\1/'); echo 0.$j; done",
      View::Outside, std::chrono::seconds(5));
  const Sentence s = make_sentence(0, {"a", "b", "c", "d"});
  EXPECT_DOUBLE_EQ(scorer.score(s, {0, 3}), 0.3);
  EXPECT_DOUBLE_EQ(scorer.score(s, {1, 2}), 0.2);
}

TEST(ExternalScorer, BadResponses)
{
  const Sentence s = make_sentence(0, {"a", "b"});
  auto kind = [&](const std::string& command, std::chrono::milliseconds timeout) {
    try
    {
      const ExternalScorer scorer(command, View::Inside, timeout);
      scorer.score(s, {0, 1});
    }
    catch (const Error& e)
    {
      return e.kind();
    }
    return ErrorKind::Format;
  };
  EXPECT_EQ(kind("while read -r l; do echo nope; done", std::chrono::seconds(5)), ErrorKind::ExternalScorer);
  EXPECT_EQ(kind("while read -r l; do echo 1.5; done", std::chrono::seconds(5)), ErrorKind::ExternalScorer);
  EXPECT_EQ(kind("sleep 5", std::chrono::milliseconds(200)), ErrorKind::Timeout);
  EXPECT_EQ(kind("exit 0", std::chrono::seconds(5)), ErrorKind::ExternalScorer);
}
