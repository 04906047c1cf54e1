#pragma once

#include "spanboot/features.hpp"
#include "spanboot/score_chart.hpp"
#include "spanboot/seed_bootstrap.hpp"
#include "spanboot/treebank.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spanboot
{

// Anything that maps a span in context to p(constituent).
class Scorer
{
public:
  virtual ~Scorer() = default;

  virtual double score(const Sentence& sentence, Span span) const = 0;

  // All cells 0 <= i <= j < n.
  virtual ScoreChart chart(const Sentence& sentence) const;
};

// Returns the same probability for every span.
class ConstantScorer final : public Scorer
{
public:
  explicit ConstantScorer(double value) : value_(value) {}
  double score(const Sentence&, Span) const override { return value_; }

private:
  double value_;
};

struct TrainOptions
{
  int max_epochs = 10;
  double learning_rate = 0.2;
  double l2 = 1e-4;
  double validation_fraction = 0.2;
  int patience = 2;
  bool balance_classes = true;
  std::uint64_t rng_seed = 0;
  FeatureSpace space;

  void validate() const;
};

struct TrainingMeta
{
  int epochs = 0;
  double learning_rate = 0.0;
  double l2 = 0.0;
  std::uint64_t rng_seed = 0;
  std::size_t example_count = 0;
  double validation_loss = 0.0;
};

/// Logistic-regression span classifier over hashed sparse features. The view is
/// fixed at construction.
class SpanScorer final : public Scorer
{
public:
  SpanScorer(FeatureView view, FeatureSpace space);

  FeatureView view() const noexcept { return view_; }
  const FeatureSpace& feature_space() const noexcept { return space_; }

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  Eigen::VectorXd& weights() noexcept { return weights_; }
  double bias() const noexcept { return bias_; }
  void set_bias(double b) noexcept { bias_ = b; }

  const TrainingMeta& meta() const noexcept { return meta_; }
  void set_meta(const TrainingMeta& meta) { meta_ = meta; }

  double logit(const FeatureVector& features) const;
  // Strictly inside (0, 1).
  double probability(const FeatureVector& features) const;

  double score(const Sentence& sentence, Span span) const override;

private:
  FeatureView view_;
  FeatureSpace space_;
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
  TrainingMeta meta_;
};

/// Trains on `examples`, whose sentence ids index `sentences`. An 80/20
/// shuffled split (by default) monitors validation log-loss; training stops
/// after max_epochs or `patience` consecutive checks without improvement and
/// keeps the best checkpoint. Deterministic in options.rng_seed.
///
/// Throws Error(SingleClassInput) when all labels agree (or the set is empty).
SpanScorer train(std::span<const LabeledSpanExample> examples, std::span<const Sentence> sentences, FeatureView view,
                 const TrainOptions& options);

// Convenience: p(constituent) through the model's own featurization.
double score_span(const Scorer& model, const Sentence& sentence, Span span);

ScoreChart score_chart(const Scorer& model, const Sentence& sentence);

/// Combines two views cell-wise, s = s_in * s_out. With `renormalize`, each
/// cell is divided by s_in * s_out + (1 - s_in) * (1 - s_out).
ScoreChart score_chart(const Scorer& inside, const Scorer& outside, const Sentence& sentence, bool renormalize = false);

// Cell-wise combination of two charts of the same size.
ScoreChart combine_charts(const ScoreChart& inside, const ScoreChart& outside, bool renormalize);

struct Thresholds
{
  double tau_min = 0.0005;
  double tau_max = 0.995;

  void validate() const;
};

struct Selection
{
  std::vector<LabeledSpanExample> constituents;
  std::vector<LabeledSpanExample> distituents;
  std::size_t constituent_pool = 0;
  std::size_t distituent_pool = 0;
};

/// Scores every span of length >= min_span_len in `corpus`. Spans scoring
/// strictly above tau_max form the constituent pool, strictly below tau_min the
/// distituent pool; a uniform sample of min(c, pool) and min(d, pool) is drawn
/// without replacement. Selected examples carry `view` and are returned in
/// (sentence, span) order.
Selection select_confident(const Scorer& model, std::span<const Sentence> corpus, const Thresholds& thresholds,
                           std::size_t c, std::size_t d, std::uint64_t rng_seed, View view = View::Inside,
                           int min_span_len = 2);

struct Mcc
{
  double value = 0.0;
  bool undefined = false; // a confusion-matrix marginal was zero; value is 0
};

// Matthews correlation of binary predictions. Throws Error(LengthMismatch).
Mcc compute_mcc(std::span<const int> predictions, std::span<const int> labels);

// F1 of the positive class (label 1); 0 when undefined.
double binary_f1(std::span<const int> predictions, std::span<const int> labels);

// Versioned JSON dump: feature space, view, bias, non-zero weights, meta.
std::string serialize_model(const SpanScorer& model);
SpanScorer parse_model(std::string_view text);
void save_model(const SpanScorer& model, const std::filesystem::path& path);
SpanScorer load_model(const std::filesystem::path& path);

} // namespace spanboot
