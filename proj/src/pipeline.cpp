#include "spanboot/pipeline.hpp"

#include "spanboot/error.hpp"
#include "spanboot/external_scorer.hpp"

#include <json.hpp>

#include <cctype>
#include <cstdlib>

namespace spanboot
{

using Json = nlohmann::ordered_json;

PipelineConfig::PipelineConfig()
{
  self_train.iterations = 5;
  co_train.iterations = 2;
  propagate();
}

void PipelineConfig::propagate()
{
  seed.rng_seed = mix_seed(rng_seed, 101);
  train.rng_seed = mix_seed(rng_seed, 102);
  self_train.rng_seed = mix_seed(rng_seed, 103);
  co_train.rng_seed = mix_seed(rng_seed, 104);
  self_train.train = train;
  co_train.train = train;
}

void PipelineConfig::validate() const
{
  seed.validate();
  train.validate();
  self_train.validate();
  co_train.validate();
  eval.validate();
  if (heuristic_top_k > 100)
    throw Error(ErrorKind::InvalidConfig, "heuristics.top_k must be <= 100");
  if (backend == ScorerBackend::External && (inside_command.empty() || outside_command.empty()))
    throw Error(ErrorKind::InvalidConfig, "external backend needs inside_command and outside_command");
  if (scorer_timeout_ms <= 0)
    throw Error(ErrorKind::InvalidConfig, "scorer.timeout_ms must be positive");
}

namespace
{

Json loop_json(const LoopConfig& loop)
{
  return {{"iterations", loop.iterations},
          {"c", loop.c},
          {"d", loop.d},
          {"tau_min", loop.thresholds.tau_min},
          {"tau_max", loop.thresholds.tau_max},
          {"pool_cap", loop.pool_cap},
          {"accumulate", loop.accumulate_self_train},
          {"min_span_len", loop.min_span_len}};
}

Json to_json(const PipelineConfig& c)
{
  Json j;
  j["rng_seed"] = c.rng_seed;
  j["paths"] = {{"corpus", c.corpus.string()},
                {"gold", c.gold.string()},
                {"model_dir", c.model_dir.string()},
                {"report_dir", c.report_dir.string()}};
  j["seed"] = {{"branching", c.seed.branching == Branching::Right ? "right" : "left"},
               {"num_slices", c.seed.num_slices},
               {"min_span_len", c.seed.min_span_len},
               {"casing_augmentation", c.seed.casing_augmentation},
               {"star_split", c.seed.star_split},
               {"distituent_mode", c.seed.distituent_mode == DistituentMode::Template ? "template" : "random"},
               {"tune_slices", c.tune_slices}};
  j["train"] = {{"max_epochs", c.train.max_epochs},
                {"learning_rate", c.train.learning_rate},
                {"l2", c.train.l2},
                {"validation_fraction", c.train.validation_fraction},
                {"patience", c.train.patience},
                {"balance_classes", c.train.balance_classes},
                {"hash_bits", c.train.space.hash_bits}};
  j["self_train"] = loop_json(c.self_train);
  j["co_train"] = loop_json(c.co_train);
  j["co_train"].erase("accumulate");
  j["heuristics"] = {{"enabled", c.heuristics}, {"top_k", c.heuristic_top_k}};
  Json eval = {{"mode", to_string(c.eval.mode)},
               {"exclude_trivial", c.eval.exclude_trivial},
               {"dedup_spans", c.eval.dedup_spans},
               {"max_len", nullptr},
               {"cutoff_len", nullptr},
               {"bucket_width", c.eval.bucket_width},
               {"strip_function_tags", c.eval.strip_function_tags}};
  if (c.eval.max_len)
    eval["max_len"] = *c.eval.max_len;
  if (c.eval.cutoff_len)
    eval["cutoff_len"] = *c.eval.cutoff_len;
  j["eval"] = eval;
  j["renormalize"] = c.renormalize;
  j["scorer"] = {{"backend", c.backend == ScorerBackend::Builtin ? "builtin" : "external"},
                 {"inside_command", c.inside_command},
                 {"outside_command", c.outside_command},
                 {"timeout_ms", c.scorer_timeout_ms}};
  return j;
}

void read_loop(const Json& j, LoopConfig& loop)
{
  const auto iterations = j.at("iterations").get<long long>();
  if (iterations < 1 || iterations > 1000)
    throw Error(ErrorKind::InvalidConfig, "iterations must be in [1, 1000]");
  loop.iterations = static_cast<int>(iterations);
  if (j.at("c").get<long long>() < 0 || j.at("d").get<long long>() < 0)
    throw Error(ErrorKind::InvalidConfig, "c and d must be >= 0");
  loop.c = j.at("c").get<std::size_t>();
  loop.d = j.at("d").get<std::size_t>();
  loop.thresholds.tau_min = j.at("tau_min").get<double>();
  loop.thresholds.tau_max = j.at("tau_max").get<double>();
  loop.pool_cap = j.at("pool_cap").get<std::size_t>();
  loop.accumulate_self_train = j.value("accumulate", false);
  loop.min_span_len = j.at("min_span_len").get<int>();
}

PipelineConfig from_json(const Json& j)
{
  PipelineConfig c;
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  const auto& paths = j.at("paths");
  c.corpus = paths.at("corpus").get<std::string>();
  c.gold = paths.at("gold").get<std::string>();
  c.model_dir = paths.at("model_dir").get<std::string>();
  c.report_dir = paths.at("report_dir").get<std::string>();

  const auto& seed = j.at("seed");
  const auto branching = seed.at("branching").get<std::string>();
  if (branching != "right" && branching != "left")
    throw Error(ErrorKind::InvalidConfig, "seed.branching must be 'right' or 'left'");
  c.seed.branching = branching == "right" ? Branching::Right : Branching::Left;
  c.seed.num_slices = seed.at("num_slices").get<int>();
  c.seed.min_span_len = seed.at("min_span_len").get<int>();
  c.seed.casing_augmentation = seed.at("casing_augmentation").get<bool>();
  c.seed.star_split = seed.at("star_split").get<bool>();
  const auto mode = seed.at("distituent_mode").get<std::string>();
  if (mode != "template" && mode != "random")
    throw Error(ErrorKind::InvalidConfig, "seed.distituent_mode must be 'template' or 'random'");
  c.seed.distituent_mode = mode == "template" ? DistituentMode::Template : DistituentMode::Random;
  c.tune_slices = seed.at("tune_slices").get<bool>();

  const auto& train = j.at("train");
  c.train.max_epochs = train.at("max_epochs").get<int>();
  c.train.learning_rate = train.at("learning_rate").get<double>();
  c.train.l2 = train.at("l2").get<double>();
  c.train.validation_fraction = train.at("validation_fraction").get<double>();
  c.train.patience = train.at("patience").get<int>();
  c.train.balance_classes = train.at("balance_classes").get<bool>();
  c.train.space.hash_bits = train.at("hash_bits").get<int>();

  read_loop(j.at("self_train"), c.self_train);
  read_loop(j.at("co_train"), c.co_train);
  c.co_train.accumulate_self_train = false;

  c.heuristics = j.at("heuristics").at("enabled").get<bool>();
  c.heuristic_top_k = j.at("heuristics").at("top_k").get<std::size_t>();

  const auto& eval = j.at("eval");
  c.eval.mode = parse_eval_mode(eval.at("mode").get<std::string>());
  c.eval.exclude_trivial = eval.at("exclude_trivial").get<bool>();
  c.eval.dedup_spans = eval.at("dedup_spans").get<bool>();
  if (!eval.at("max_len").is_null())
    c.eval.max_len = eval.at("max_len").get<int>();
  if (!eval.at("cutoff_len").is_null())
    c.eval.cutoff_len = eval.at("cutoff_len").get<int>();
  c.eval.bucket_width = eval.at("bucket_width").get<int>();
  c.eval.strip_function_tags = eval.at("strip_function_tags").get<bool>();
  if (c.eval.mode == EvalMode::EvalbStyle)
  {
    c.eval.exclude_trivial = false;
    c.eval.dedup_spans = false;
  }

  c.renormalize = j.at("renormalize").get<bool>();
  const auto& scorer = j.at("scorer");
  const auto backend = scorer.at("backend").get<std::string>();
  if (backend != "builtin" && backend != "external")
    throw Error(ErrorKind::InvalidConfig, "scorer.backend must be 'builtin' or 'external'");
  c.backend = backend == "builtin" ? ScorerBackend::Builtin : ScorerBackend::External;
  c.inside_command = scorer.at("inside_command").get<std::string>();
  c.outside_command = scorer.at("outside_command").get<std::string>();
  c.scorer_timeout_ms = scorer.at("timeout_ms").get<int>();

  c.propagate();
  c.validate();
  return c;
}

std::string env_name(const std::string& section, const std::string& key)
{
  std::string name = "SPANBOOT_";
  for (char ch : section.empty() ? key : section + "_" + key)
    name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

Json env_value(const char* text)
{
  try
  {
    return Json::parse(text);
  }
  catch (const nlohmann::json::exception&)
  {
    return Json(std::string(text));
  }
}

} // namespace

std::string default_config_json()
{
  return to_json(PipelineConfig{}).dump(2) + "\n";
}

std::string config_to_json(const PipelineConfig& config)
{
  return to_json(config).dump(2) + "\n";
}

PipelineConfig load_config(std::string_view file_text, const std::function<const char*(const char*)>& getenv)
{
  try
  {
    Json j = to_json(PipelineConfig{});
    if (file_text.find_first_not_of(" \t\r\n") != std::string_view::npos)
    {
      const Json overrides = Json::parse(file_text);
      if (!overrides.is_object())
        throw Error(ErrorKind::InvalidConfig, "config file must hold a JSON object");
      for (const auto& [section, value] : overrides.items())
      {
        if (!j.contains(section))
          throw Error(ErrorKind::InvalidConfig, "unknown config key '" + section + "'");
        if (value.is_object())
        {
          for (const auto& [key, inner] : value.items())
          {
            if (!j[section].is_object() || !j[section].contains(key))
              throw Error(ErrorKind::InvalidConfig, "unknown config key '" + section + "." + key + "'");
            j[section][key] = inner;
          }
        }
        else
        {
          j[section] = value;
        }
      }
    }

    const auto env = getenv ? getenv : [](const char* name) -> const char* { return std::getenv(name); };
    for (auto& [section, value] : j.items())
    {
      if (value.is_object())
      {
        for (auto& [key, inner] : value.items())
          if (const char* text = env(env_name(section, key).c_str()))
            inner = env_value(text);
      }
      else if (const char* text = env(env_name("", section).c_str()))
      {
        value = env_value(text);
      }
    }
    return from_json(j);
  }
  catch (const nlohmann::json::exception& e)
  {
    throw Error(ErrorKind::InvalidConfig, std::string("bad config: ") + e.what());
  }
}

std::vector<BinaryTree> parse_sentences(std::span<const Sentence> sentences, const Scorer& inside,
                                        const Scorer* outside, const HeuristicConfig& heuristics, bool renormalize)
{
  std::vector<BinaryTree> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences)
  {
    ScoreChart chart = outside ? score_chart(inside, *outside, s, renormalize) : inside.chart(s);
    if (heuristics.enabled)
      chart = apply_heuristics(chart, s, heuristics);
    out.push_back(cyk_decode(chart, s));
  }
  return out;
}

std::string format_predictions(std::span<const BinaryTree> trees)
{
  std::string out;
  for (const auto& t : trees)
    out += to_bracketed(t) + "\n";
  return out;
}

std::unique_ptr<Scorer> load_scorer(const PipelineConfig& config, const std::filesystem::path& model, View view)
{
  if (config.backend == ScorerBackend::External)
    return std::make_unique<ExternalScorer>(view == View::Inside ? config.inside_command : config.outside_command,
                                            view, std::chrono::milliseconds(config.scorer_timeout_ms));
  return std::make_unique<SpanScorer>(load_model(model));
}

std::vector<Sentence> sentences_of(std::span<const GoldTree> golds)
{
  std::vector<Sentence> out;
  out.reserve(golds.size());
  for (const auto& g : golds)
    out.push_back(Sentence{static_cast<std::int64_t>(out.size()), g.sentence.tokens});
  return out;
}

StagedResult run_staged(std::span<const GoldTree> golds, const PipelineConfig& config, const StagedOptions& options)
{
  config.validate();
  const std::vector<Sentence> sentences = sentences_of(golds);
  const HeuristicConfig heuristics =
      config.heuristics ? derive_heuristics(sentences, config.heuristic_top_k) : HeuristicConfig{};

  auto f1_of = [&](const Scorer& inside, const Scorer* outside) {
    const auto trees = parse_sentences(sentences, inside, outside, heuristics, config.renormalize);
    return corpus_eval(trees, golds, config.eval).f1;
  };

  StagedResult result;
  result.left_branching = trivial_baseline(golds, Baseline::Left, config.eval).f1;
  result.right_branching = trivial_baseline(golds, Baseline::Right, config.eval).f1;

  SeedConfig seed_config = config.seed;
  if (config.tune_slices)
    seed_config = tune_slice_count(seed_config, seed_validation_evaluator(sentences, config.train));
  const SeedSet seeds = generate_seeds(sentences, seed_config);
  std::vector<Sentence> table = sentences;
  table.insert(table.end(), seeds.augmented.begin(), seeds.augmented.end());

  std::map<int, double> per_iteration;
  const MetricsCallback metrics = [&](int k, const SpanScorer& inside, const SpanScorer*) {
    per_iteration[k] = f1_of(inside, nullptr);
    return std::map<std::string, double>{{"f1", per_iteration[k]}};
  };
  LoopResult self = self_train(seeds.examples, table, sentences, config.self_train, metrics);
  result.inside = per_iteration.at(1);
  result.self_trained = per_iteration.at(config.self_train.iterations);
  result.self_trace = self.trace;

  const MetricsCallback co_metrics = [&](int, const SpanScorer& inside, const SpanScorer* outside) {
    return std::map<std::string, double>{{"f1", f1_of(inside, outside)}};
  };
  LoopResult co = co_train(self.inside_set, self.outside_set, table, sentences, config.co_train, co_metrics);
  result.co_trained = co.trace.records.back().metrics.at("f1");
  result.co_trace = co.trace;

  if (options.concat)
  {
    const SpanScorer concat =
        concat_baseline(seeds.examples, with_view(seeds.examples, View::Outside), table, config.train);
    result.concat = f1_of(concat, nullptr);
  }
  if (options.random_slices)
  {
    SeedConfig random_config = seed_config;
    random_config.distituent_mode = DistituentMode::Random;
    const SeedSet random_seeds = generate_seeds(sentences, random_config);
    std::vector<Sentence> random_table = sentences;
    random_table.insert(random_table.end(), random_seeds.augmented.begin(), random_seeds.augmented.end());
    TrainOptions options_in = config.self_train.train;
    options_in.rng_seed = mix_seed(config.self_train.rng_seed, 1 * 16 + 1);
    const SpanScorer model = train(random_seeds.examples, random_table, FeatureView::Inside, options_in);
    result.random_slices = f1_of(model, nullptr);
  }
  return result;
}

} // namespace spanboot
