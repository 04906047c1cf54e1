#include "spanboot/span_scorer.hpp"

#include "spanboot/error.hpp"
#include "spanboot/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spanboot
{

namespace
{

constexpr double kProbabilityFloor = 1e-12;

double sigmoid(double z)
{
  const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

} // namespace

ScoreChart Scorer::chart(const Sentence& sentence) const
{
  const int n = sentence.size();
  ScoreChart out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      out(i, j) = score(sentence, Span{i, j});
  return out;
}

void TrainOptions::validate() const
{
  if (max_epochs < 1)
    throw Error(ErrorKind::InvalidConfig, "max_epochs must be >= 1");
  if (!(learning_rate > 0.0))
    throw Error(ErrorKind::InvalidConfig, "learning_rate must be positive");
  if (l2 < 0.0)
    throw Error(ErrorKind::InvalidConfig, "l2 must be non-negative");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0)
    throw Error(ErrorKind::InvalidConfig, "validation_fraction must be in [0, 1)");
  if (patience < 1)
    throw Error(ErrorKind::InvalidConfig, "patience must be >= 1");
  if (space.hash_bits < 4 || space.hash_bits > 28)
    throw Error(ErrorKind::InvalidConfig, "hash_bits must be in [4, 28]");
}

SpanScorer::SpanScorer(FeatureView view, FeatureSpace space)
  : view_(view), space_(space), weights_(Eigen::VectorXd::Zero(space.dim(view)))
{
}

double SpanScorer::logit(const FeatureVector& features) const
{
  return bias_ + features.dot(weights_);
}

double SpanScorer::probability(const FeatureVector& features) const
{
  return sigmoid(logit(features));
}

double SpanScorer::score(const Sentence& sentence, Span span) const
{
  return probability(featurize(sentence, span, view_, space_));
}

SpanScorer train(std::span<const LabeledSpanExample> examples, std::span<const Sentence> sentences, FeatureView view,
                 const TrainOptions& options)
{
  options.validate();
  const std::size_t total = examples.size();
  const auto positives = static_cast<std::size_t>(
      std::count_if(examples.begin(), examples.end(), [](const auto& e) { return e.label == 1; }));
  if (positives == 0 || positives == total)
    throw Error(ErrorKind::SingleClassInput, "training set of " + std::to_string(total) +
                                                 " examples does not contain both classes");

  std::vector<FeatureVector> features;
  std::vector<double> targets;
  features.reserve(total);
  targets.reserve(total);
  for (const auto& e : examples)
  {
    features.push_back(featurize(lookup(sentences, e.sentence_id), e.span, view, options.space));
    targets.push_back(e.label == 1 ? 1.0 : 0.0);
  }

  Rng rng(options.rng_seed);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);

  std::size_t n_val = static_cast<std::size_t>(std::floor(options.validation_fraction * static_cast<double>(total)));
  if (n_val == 0 || n_val >= total)
    n_val = 0;
  std::vector<std::size_t> validation(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> training(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  double w_pos = 1.0, w_neg = 1.0;
  if (options.balance_classes)
  {
    std::size_t pos = 0;
    for (auto k : training)
      pos += targets[k] > 0.5;
    const std::size_t neg = training.size() - pos;
    if (pos > 0 && neg > 0)
    {
      w_pos = static_cast<double>(training.size()) / (2.0 * static_cast<double>(pos));
      w_neg = static_cast<double>(training.size()) / (2.0 * static_cast<double>(neg));
    }
  }

  SpanScorer model(view, options.space);
  Eigen::VectorXd& w = model.weights();
  double bias = 0.0;

  auto validation_loss = [&]() {
    double loss = 0.0, weight = 0.0;
    for (auto k : validation)
    {
      const double p = sigmoid(bias + features[k].dot(w));
      const double cw = targets[k] > 0.5 ? w_pos : w_neg;
      loss -= cw * (targets[k] > 0.5 ? std::log(p) : std::log(1.0 - p));
      weight += cw;
    }
    return loss / weight;
  };

  Eigen::VectorXd best_w = w;
  double best_bias = bias;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  int epochs = 0;

  for (int epoch = 0; epoch < options.max_epochs; ++epoch)
  {
    shuffle(training, rng);
    const double lr = options.learning_rate / std::sqrt(1.0 + epoch);
    for (auto k : training)
    {
      const FeatureVector& x = features[k];
      const double p = sigmoid(bias + x.dot(w));
      const double g = (targets[k] > 0.5 ? w_pos : w_neg) * (p - targets[k]);
      bias -= lr * g;
      for (FeatureVector::InnerIterator it(x); it; ++it)
      {
        double& wi = w[it.index()];
        wi -= lr * (g * it.value() + options.l2 * wi);
      }
    }
    ++epochs;

    if (validation.empty())
      continue;
    const double loss = validation_loss();
    if (loss < best_loss)
    {
      best_loss = loss;
      best_w = w;
      best_bias = bias;
      stale = 0;
    }
    else if (++stale >= options.patience)
    {
      break;
    }
  }

  if (!validation.empty())
  {
    w = best_w;
    bias = best_bias;
  }
  model.set_bias(bias);
  model.set_meta(TrainingMeta{epochs, options.learning_rate, options.l2, options.rng_seed, total,
                              validation.empty() ? 0.0 : best_loss});
  return model;
}

double score_span(const Scorer& model, const Sentence& sentence, Span span)
{
  return model.score(sentence, span);
}

ScoreChart score_chart(const Scorer& model, const Sentence& sentence)
{
  return model.chart(sentence);
}

ScoreChart combine_charts(const ScoreChart& inside, const ScoreChart& outside, bool renormalize)
{
  if (inside.size() != outside.size())
    throw Error(ErrorKind::LengthMismatch, "charts differ in size");
  const auto& a = inside.matrix().array();
  const auto& b = outside.matrix().array();
  Eigen::MatrixXd combined = (a * b).matrix();
  if (renormalize)
    combined = (a * b / (a * b + (1.0 - a) * (1.0 - b))).matrix();
  return ScoreChart::from_matrix(combined);
}

ScoreChart score_chart(const Scorer& inside, const Scorer& outside, const Sentence& sentence, bool renormalize)
{
  return combine_charts(inside.chart(sentence), outside.chart(sentence), renormalize);
}

void Thresholds::validate() const
{
  if (!(0.0 <= tau_min && tau_min < tau_max && tau_max <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "thresholds must satisfy 0 <= tau_min < tau_max <= 1");
}

namespace
{

struct Candidate
{
  std::int64_t sentence_id;
  Span span;
  double score;
};

std::vector<LabeledSpanExample> sample(std::vector<Candidate>& pool, std::size_t count, int label, View view, Rng& rng)
{
  std::vector<LabeledSpanExample> out;
  if (count >= pool.size())
  {
    for (const auto& c : pool)
      out.push_back(LabeledSpanExample{c.sentence_id, c.span, label, view});
  }
  else
  {
    // Partial Fisher-Yates: the first `count` slots end up a uniform sample.
    for (std::size_t k = 0; k < count; ++k)
    {
      const std::size_t pick = k + static_cast<std::size_t>(uniform_index(rng, pool.size() - k));
      std::swap(pool[k], pool[pick]);
      out.push_back(LabeledSpanExample{pool[k].sentence_id, pool[k].span, label, view});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

Selection select_confident(const Scorer& model, std::span<const Sentence> corpus, const Thresholds& thresholds,
                           std::size_t c, std::size_t d, std::uint64_t rng_seed, View view, int min_span_len)
{
  thresholds.validate();
  std::vector<Candidate> high, low;
  for (const auto& sentence : corpus)
  {
    const int n = sentence.size();
    if (n < min_span_len)
      continue;
    const ScoreChart chart = model.chart(sentence);
    for (int i = 0; i < n; ++i)
    {
      for (int j = i + min_span_len - 1; j < n; ++j)
      {
        const double s = chart(i, j);
        if (s > thresholds.tau_max)
          high.push_back(Candidate{sentence.id, Span{i, j}, s});
        else if (s < thresholds.tau_min)
          low.push_back(Candidate{sentence.id, Span{i, j}, s});
      }
    }
  }

  // Most confident first, then position; fixes the order the sampler sees.
  auto key = [](const Candidate& c) { return std::tie(c.sentence_id, c.span); };
  std::stable_sort(high.begin(), high.end(), [&](const Candidate& a, const Candidate& b) {
    return a.score != b.score ? a.score > b.score : key(a) < key(b);
  });
  std::stable_sort(low.begin(), low.end(), [&](const Candidate& a, const Candidate& b) {
    return a.score != b.score ? a.score < b.score : key(a) < key(b);
  });

  Selection out;
  out.constituent_pool = high.size();
  out.distituent_pool = low.size();
  Rng rng(rng_seed);
  out.constituents = sample(high, c, 1, view, rng);
  out.distituents = sample(low, d, 0, view, rng);
  return out;
}

Mcc compute_mcc(std::span<const int> predictions, std::span<const int> labels)
{
  if (predictions.size() != labels.size())
    throw Error(ErrorKind::LengthMismatch, "predictions and labels differ in length");
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < labels.size(); ++k)
  {
    const bool p = predictions[k] == 1, y = labels[k] == 1;
    tp += p && y;
    tn += !p && !y;
    fp += p && !y;
    fn += !p && y;
  }
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0)
    return Mcc{0.0, true};
  return Mcc{(tp * tn - fp * fn) / std::sqrt(denom), false};
}

double binary_f1(std::span<const int> predictions, std::span<const int> labels)
{
  if (predictions.size() != labels.size())
    throw Error(ErrorKind::LengthMismatch, "predictions and labels differ in length");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < labels.size(); ++k)
  {
    const bool p = predictions[k] == 1, y = labels[k] == 1;
    tp += p && y;
    fp += p && !y;
    fn += !p && y;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

// ---------------------------------------------------------------------------
// Model files

namespace
{

constexpr std::string_view kModelFormat = "spanboot-span-scorer";
constexpr int kModelVersion = 1;

} // namespace

std::string serialize_model(const SpanScorer& model)
{
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["view"] = to_string(model.view());
  j["feature_space"] = {{"hash_bits", model.feature_space().hash_bits}, {"dim", model.weights().size()}};
  j["bias"] = model.bias();
  const TrainingMeta& m = model.meta();
  j["training_meta"] = {{"epochs", m.epochs},           {"learning_rate", m.learning_rate},
                        {"l2", m.l2},                   {"rng_seed", m.rng_seed},
                        {"example_count", m.example_count}, {"validation_loss", m.validation_loss}};
  auto weights = nlohmann::ordered_json::array();
  const Eigen::VectorXd& w = model.weights();
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w[k] != 0.0)
      weights.push_back({k, w[k]});
  j["weights"] = std::move(weights);
  return j.dump() + "\n";
}

SpanScorer parse_model(std::string_view text)
{
  try
  {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormat)
      throw Error(ErrorKind::Format, "not a span scorer model file");
    if (j.at("version").get<int>() != kModelVersion)
      throw Error(ErrorKind::Format, "unsupported model version " + j.at("version").dump());
    FeatureSpace space;
    space.hash_bits = j.at("feature_space").at("hash_bits").get<int>();
    if (space.hash_bits < 4 || space.hash_bits > 28)
      throw Error(ErrorKind::Format, "hash_bits out of range");
    SpanScorer model(parse_feature_view(j.at("view").get<std::string>()), space);
    if (j.at("feature_space").at("dim").get<Eigen::Index>() != model.weights().size())
      throw Error(ErrorKind::Format, "weight dimension does not match the feature space");
    model.set_bias(j.at("bias").get<double>());
    const auto& m = j.at("training_meta");
    model.set_meta(TrainingMeta{m.at("epochs").get<int>(), m.at("learning_rate").get<double>(), m.at("l2").get<double>(),
                                m.at("rng_seed").get<std::uint64_t>(), m.at("example_count").get<std::size_t>(),
                                m.at("validation_loss").get<double>()});
    for (const auto& entry : j.at("weights"))
    {
      const auto index = entry.at(0).get<Eigen::Index>();
      if (index < 0 || index >= model.weights().size())
        throw Error(ErrorKind::Format, "weight index out of range");
      model.weights()[index] = entry.at(1).get<double>();
    }
    return model;
  }
  catch (const nlohmann::json::exception& e)
  {
    throw Error(ErrorKind::Format, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const SpanScorer& model, const std::filesystem::path& path)
{
  write_file(path, serialize_model(model));
}

SpanScorer load_model(const std::filesystem::path& path)
{
  return parse_model(read_file(path));
}

} // namespace spanboot
