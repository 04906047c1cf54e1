// Command-line driver: bootstrap -> train -> selftrain -> cotrain -> parse -> eval,
// plus synthetic corpora and run reports.

#include "spanboot/bootstrap_loops.hpp"
#include "spanboot/error.hpp"
#include "spanboot/eval.hpp"
#include "spanboot/pipeline.hpp"
#include "spanboot/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace spanboot;

namespace
{

namespace files
{
constexpr const char* kSeeds = "seeds.tsv";
constexpr const char* kAugmented = "augmented.tsv";
constexpr const char* kSeedConfig = "seed_config.json";
constexpr const char* kInside = "inside.json";
constexpr const char* kSelfInside = "selftrain.inside.json";
constexpr const char* kSelfOutside = "selftrain.outside.json";
constexpr const char* kSelfInsideSet = "selftrain.inside_set.tsv";
constexpr const char* kSelfOutsideSet = "selftrain.outside_set.tsv";
constexpr const char* kSelfTrace = "selftrain.trace.jsonl";
constexpr const char* kCoInside = "cotrain.inside.json";
constexpr const char* kCoOutside = "cotrain.outside.json";
constexpr const char* kCoTrace = "cotrain.trace.jsonl";
constexpr const char* kSummary = "summary.json";
constexpr const char* kSentences = "sentences.tsv";
constexpr const char* kBuckets = "buckets.tsv";
} // namespace files

struct Common
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string corpus;
  std::string gold;
  std::string model_dir;
  std::string report_dir;
};

void add_common(CLI::App& cmd, Common& common)
{
  cmd.add_option("-c,--config", common.config_path, "JSON config file (defaults apply to missing keys)");
  cmd.add_option("--seed", common.seed, "global rng seed");
  cmd.add_option("--corpus", common.corpus, "training sentences, plain or bracketed");
  cmd.add_option("--gold", common.gold, "gold trees, bracketed");
  cmd.add_option("--model-dir", common.model_dir, "directory for seeds, models and traces");
  cmd.add_option("--report-dir", common.report_dir, "directory for evaluation reports");
}

PipelineConfig resolve(const Common& common, const std::function<void(PipelineConfig&)>& tweak = {})
{
  const std::string text = common.config_path.empty() ? std::string() : read_file(common.config_path);
  PipelineConfig config = load_config(text);
  if (common.seed)
    config.rng_seed = *common.seed;
  if (!common.corpus.empty())
    config.corpus = common.corpus;
  if (!common.gold.empty())
    config.gold = common.gold;
  if (!common.model_dir.empty())
    config.model_dir = common.model_dir;
  if (!common.report_dir.empty())
    config.report_dir = common.report_dir;
  if (tweak)
    tweak(config);
  config.propagate();
  config.validate();
  return config;
}

std::vector<Sentence> load_corpus(const PipelineConfig& config)
{
  if (config.corpus.empty())
    throw Error(ErrorKind::InvalidConfig, "no corpus path given (paths.corpus or --corpus)");
  return read_corpus(config.corpus);
}

std::vector<GoldTree> load_gold(const fs::path& path)
{
  if (path.empty())
    throw Error(ErrorKind::InvalidConfig, "no gold path given (paths.gold or --gold)");
  std::vector<GoldTree> trees;
  for (const auto& t : read_treebank(path))
    trees.push_back(normalize(t));
  for (std::size_t k = 0; k < trees.size(); ++k)
    trees[k].sentence.id = static_cast<std::int64_t>(k);
  return trees;
}

// Corpus sentences followed by the augmented seed sentences.
std::vector<Sentence> sentence_table(const PipelineConfig& config, const std::vector<Sentence>& corpus)
{
  std::vector<Sentence> table = corpus;
  const auto augmented = parse_sentence_table(read_file(config.model_dir / files::kAugmented));
  for (const auto& s : augmented)
  {
    if (s.id != static_cast<std::int64_t>(table.size()))
      throw Error(ErrorKind::Format, "augmented sentence ids do not continue the corpus; rerun bootstrap");
    table.push_back(s);
  }
  return table;
}

std::vector<LabeledSpanExample> read_examples(const fs::path& path)
{
  return parse_seed_file(read_file(path));
}

void print_warnings(const LoopTrace& trace)
{
  for (const auto& w : trace.warnings)
    std::cerr << "warning: " << w << "\n";
}

void print_trace(const LoopTrace& trace)
{
  for (const auto& r : trace.records)
  {
    std::cout << r.loop << " iteration " << r.iteration << ": |I|=" << r.inside_size << " |O|=" << r.outside_size;
    for (const auto& [name, value] : r.metrics)
      std::cout << " " << name << "=" << value;
    std::cout << "\n";
  }
}

// ---------------------------------------------------------------------------

int cmd_config(const Common& common)
{
  std::cout << config_to_json(resolve(common));
  return 0;
}

int cmd_bootstrap(const Common& common, const std::string& branching, std::optional<int> slices,
                  std::optional<std::string> mode)
{
  const PipelineConfig config = resolve(common, [&](PipelineConfig& c) {
    if (!branching.empty())
    {
      if (branching != "right" && branching != "left")
        throw Error(ErrorKind::InvalidConfig, "--branching must be 'right' or 'left'");
      c.seed.branching = branching == "right" ? Branching::Right : Branching::Left;
    }
    if (slices)
      c.seed.num_slices = *slices;
    if (mode)
    {
      if (*mode != "template" && *mode != "random")
        throw Error(ErrorKind::InvalidConfig, "--distituents must be 'template' or 'random'");
      c.seed.distituent_mode = *mode == "template" ? DistituentMode::Template : DistituentMode::Random;
    }
  });
  const auto corpus = load_corpus(config);
  SeedConfig seed_config = config.seed;
  if (config.tune_slices)
    seed_config = tune_slice_count(seed_config, seed_validation_evaluator(corpus, config.train));
  const SeedSet seeds = generate_seeds(corpus, seed_config);

  fs::create_directories(config.model_dir);
  write_file(config.model_dir / files::kSeeds, format_seed_file(seeds.examples));
  write_file(config.model_dir / files::kAugmented, format_sentence_table(seeds.augmented));
  nlohmann::ordered_json used = {{"num_slices", seed_config.num_slices},
                                 {"branching", seed_config.branching == Branching::Right ? "right" : "left"}};
  write_file(config.model_dir / files::kSeedConfig, used.dump(2) + "\n");

  const ClassBalance balance = class_balance(seeds.examples);
  std::cout << "seeds: " << balance.constituents << " constituents, " << balance.distituents << " distituents, "
            << seeds.augmented.size() << " augmented sentences, num_slices=" << seed_config.num_slices << "\n";
  return 0;
}

int cmd_train(const Common& common)
{
  const PipelineConfig config = resolve(common);
  const auto corpus = load_corpus(config);
  const auto table = sentence_table(config, corpus);
  const auto seeds = read_examples(config.model_dir / files::kSeeds);
  const SpanScorer model = train(seeds, table, FeatureView::Inside, config.train);
  save_model(model, config.model_dir / files::kInside);
  std::cout << "inside model: " << model.meta().example_count << " examples, " << model.meta().epochs
            << " epochs\n";
  return 0;
}

int cmd_selftrain(const Common& common, std::optional<int> iterations)
{
  const PipelineConfig config = resolve(common, [&](PipelineConfig& c) {
    if (iterations)
      c.self_train.iterations = *iterations;
  });
  const auto corpus = load_corpus(config);
  const auto table = sentence_table(config, corpus);
  const auto seeds = read_examples(config.model_dir / files::kSeeds);
  const LoopResult result = self_train(seeds, table, corpus, config.self_train);
  save_model(result.inside, config.model_dir / files::kSelfInside);
  save_model(result.outside, config.model_dir / files::kSelfOutside);
  write_file(config.model_dir / files::kSelfInsideSet, format_seed_file(result.inside_set));
  write_file(config.model_dir / files::kSelfOutsideSet, format_seed_file(result.outside_set));
  write_file(config.model_dir / files::kSelfTrace, format_trace(result.trace));
  print_trace(result.trace);
  print_warnings(result.trace);
  return 0;
}

int cmd_cotrain(const Common& common, std::optional<int> iterations)
{
  const PipelineConfig config = resolve(common, [&](PipelineConfig& c) {
    if (iterations)
      c.co_train.iterations = *iterations;
  });
  const auto corpus = load_corpus(config);
  const auto table = sentence_table(config, corpus);
  const auto inside = read_examples(config.model_dir / files::kSelfInsideSet);
  const auto outside = read_examples(config.model_dir / files::kSelfOutsideSet);
  const LoopResult result = co_train(inside, outside, table, corpus, config.co_train);
  save_model(result.inside, config.model_dir / files::kCoInside);
  save_model(result.outside, config.model_dir / files::kCoOutside);
  write_file(config.model_dir / files::kCoTrace, format_trace(result.trace));
  print_trace(result.trace);
  print_warnings(result.trace);
  return 0;
}

int cmd_parse(const Common& common, const std::string& input, const std::string& output, const std::string& stage)
{
  const PipelineConfig config = resolve(common);
  const auto sentences = read_corpus(input);

  fs::path inside_path, outside_path;
  if (stage == "inside")
    inside_path = config.model_dir / files::kInside;
  else if (stage == "selftrain")
    inside_path = config.model_dir / files::kSelfInside;
  else if (stage == "cotrain")
  {
    inside_path = config.model_dir / files::kCoInside;
    outside_path = config.model_dir / files::kCoOutside;
  }
  else
    throw Error(ErrorKind::InvalidConfig, "--stage must be inside, selftrain or cotrain");

  const auto inside = load_scorer(config, inside_path, View::Inside);
  std::unique_ptr<Scorer> outside;
  if (!outside_path.empty())
    outside = load_scorer(config, outside_path, View::Outside);

  HeuristicConfig heuristics;
  if (config.heuristics)
  {
    // Statistics come from the training corpus, never from the parsed input.
    heuristics = derive_heuristics(load_corpus(config), config.heuristic_top_k);
    heuristics.enabled = true;
  }
  const auto trees = parse_sentences(sentences, *inside, outside.get(), heuristics, config.renormalize);
  const std::string text = format_predictions(trees);
  if (output.empty() || output == "-")
    std::cout << text;
  else
    write_file(output, text);
  return 0;
}

int cmd_eval(const Common& common, const std::string& predictions, bool baselines)
{
  const PipelineConfig config = resolve(common);
  const auto golds = load_gold(config.gold);
  auto preds = read_predictions(read_file(predictions));

  EvalConfig eval = config.eval;
  eval.skip_yield_mismatch = true;
  std::vector<ReportRow> rows;
  const EvalReport main = corpus_eval(preds, golds, eval);
  rows.push_back({"model", main});
  for (auto k : main.yield_mismatches)
    std::cerr << "YieldMismatch: sentence " << k << "\n";
  if (!main.yield_mismatches.empty())
    std::cerr << main.yield_mismatches.size() << " sentence(s) skipped for a yield mismatch\n";

  if (baselines)
  {
    for (auto which : {Baseline::Left, Baseline::Right, Baseline::Balanced, Baseline::Random})
      rows.push_back({std::string(to_string(which)), trivial_baseline(golds, which, config.eval, config.rng_seed)});
    rows.push_back({"oracle_binary", oracle_binary(golds, config.eval)});
  }

  fs::create_directories(config.report_dir);
  write_file(config.report_dir / files::kSummary, format_summary(rows));
  write_file(config.report_dir / files::kSentences, format_score_table(main));
  write_file(config.report_dir / files::kBuckets, format_bucket_table(main));
  for (const auto& row : rows)
    std::printf("%-16s F1 %.4f  P %.4f  R %.4f\n", row.name.c_str(), row.report.f1, row.report.precision,
                row.report.recall);
  return 0;
}

int cmd_synth(const std::string& grammar_path, std::size_t count, std::uint64_t seed, const std::string& prefix,
              int max_len)
{
  const SyntheticGrammar grammar = load_grammar(grammar_path);
  SampleOptions options;
  options.max_len = max_len;
  const auto trees = sample_corpus(grammar, count, seed, options);
  std::string sentences, gold;
  for (const auto& t : trees)
  {
    for (std::size_t k = 0; k < t.sentence.tokens.size(); ++k)
      sentences += (k ? " " : "") + t.sentence.tokens[k];
    sentences += "\n";
    gold += to_bracketed(t) + "\n";
  }
  if (const auto parent = fs::path(prefix).parent_path(); !parent.empty())
    fs::create_directories(parent);
  write_file(prefix + ".txt", sentences);
  write_file(prefix + ".gold", gold);
  std::cout << "wrote " << trees.size() << " sentences to " << prefix << ".txt and " << prefix << ".gold\n";
  return 0;
}

// Summarizes run logs; with several summary files, also the max F1 per row.
int cmd_report(const std::vector<std::string>& traces, const std::vector<std::string>& summaries)
{
  for (const auto& path : traces)
  {
    const LoopTrace trace = parse_trace(read_file(path));
    std::cout << path << "\n";
    print_trace(trace);
    print_warnings(trace);
  }
  std::map<std::string, std::vector<double>> by_row;
  for (const auto& path : summaries)
  {
    try
    {
      const auto doc = nlohmann::json::parse(read_file(path));
      for (const auto& row : doc.at("rows"))
        by_row[row.at("name").get<std::string>()].push_back(row.at("f1").get<double>());
    }
    catch (const nlohmann::json::exception& e)
    {
      throw Error(ErrorKind::Format, path + ": " + e.what());
    }
  }
  if (!by_row.empty())
  {
    std::printf("%-16s %5s %8s %8s\n", "row", "runs", "mean", "max");
    for (const auto& [name, values] : by_row)
    {
      double sum = 0.0;
      for (double v : values)
        sum += v;
      std::printf("%-16s %5zu %8.4f %8.4f\n", name.c_str(), values.size(), sum / static_cast<double>(values.size()),
                  *std::max_element(values.begin(), values.end()));
    }
  }
  return 0;
}

int cmd_experiment(const Common& common, bool ablations)
{
  const PipelineConfig config = resolve(common);
  const auto golds = load_gold(config.gold);
  const StagedResult r = run_staged(golds, config, StagedOptions{ablations, ablations});
  nlohmann::ordered_json j = {{"rng_seed", config.rng_seed},
                              {"left_branching", r.left_branching},
                              {"right_branching", r.right_branching},
                              {"inside", r.inside},
                              {"self_trained", r.self_trained},
                              {"co_trained", r.co_trained}};
  if (r.concat)
    j["concat"] = *r.concat;
  if (r.random_slices)
    j["random_slices"] = *r.random_slices;
  std::cout << j.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Unsupervised constituency parsing by inside/outside span bootstrapping"};
  app.require_subcommand(1);
  Common common;

  auto* config_cmd = app.add_subcommand("config", "print the effective config");
  add_common(*config_cmd, common);

  std::string branching;
  std::optional<int> slices;
  std::optional<std::string> distituents;
  auto* bootstrap = app.add_subcommand("bootstrap", "write the seed set for a corpus");
  add_common(*bootstrap, common);
  bootstrap->add_option("--branching", branching, "right or left");
  bootstrap->add_option("--slices", slices, "number of distituent slices");
  bootstrap->add_option("--distituents", distituents, "template or random");

  auto* train_cmd = app.add_subcommand("train", "train the inside model on the seeds");
  add_common(*train_cmd, common);

  std::optional<int> iterations;
  auto* selftrain = app.add_subcommand("selftrain", "self-train the inside model, then fit the outside model");
  add_common(*selftrain, common);
  selftrain->add_option("-K,--iterations", iterations, "iteration count");

  auto* cotrain = app.add_subcommand("cotrain", "co-train the inside and outside models");
  add_common(*cotrain, common);
  cotrain->add_option("-K,--iterations", iterations, "iteration count");

  std::string input, output = "-", stage = "cotrain";
  auto* parse = app.add_subcommand("parse", "decode sentences into binary trees");
  add_common(*parse, common);
  parse->add_option("-i,--input", input, "sentences, one per line")->required();
  parse->add_option("-o,--output", output, "output file ('-' for stdout)");
  parse->add_option("--stage", stage, "inside, selftrain or cotrain");

  std::string predictions;
  bool baselines = false;
  auto* eval = app.add_subcommand("eval", "score predictions against gold trees");
  add_common(*eval, common);
  eval->add_option("-p,--predictions", predictions, "bracketed predictions")->required();
  eval->add_flag("--baselines", baselines, "add LB, RB, balanced, random and oracle rows");

  std::string grammar_path, prefix;
  std::size_t count = 2000;
  std::uint64_t synth_seed = 0;
  int max_len = 40;
  auto* synth = app.add_subcommand("synth", "sample a corpus and gold trees from a PCFG");
  synth->add_option("-g,--grammar", grammar_path, "grammar JSON")->required();
  synth->add_option("-n,--count", count, "sentence count");
  synth->add_option("--seed", synth_seed, "sampling seed");
  synth->add_option("--max-len", max_len, "maximum sentence length");
  synth->add_option("-o,--out", prefix, "output prefix (.txt and .gold)")->required();

  std::vector<std::string> traces, summaries;
  auto* report = app.add_subcommand("report", "summarize run logs and evaluation summaries");
  report->add_option("--trace", traces, "trace files");
  report->add_option("--summary", summaries, "summary.json files from several runs");

  bool ablations = false;
  auto* experiment = app.add_subcommand("experiment", "run every stage on a gold corpus and print F1 per stage");
  add_common(*experiment, common);
  experiment->add_flag("--ablations", ablations, "also run the concat and random-slice arms");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try
  {
    if (*config_cmd)
      return cmd_config(common);
    if (*bootstrap)
      return cmd_bootstrap(common, branching, slices, distituents);
    if (*train_cmd)
      return cmd_train(common);
    if (*selftrain)
      return cmd_selftrain(common, iterations);
    if (*cotrain)
      return cmd_cotrain(common, iterations);
    if (*parse)
      return cmd_parse(common, input, output, stage);
    if (*eval)
      return cmd_eval(common, predictions, baselines);
    if (*synth)
      return cmd_synth(grammar_path, count, synth_seed, prefix, max_len);
    if (*report)
      return cmd_report(traces, summaries);
    if (*experiment)
      return cmd_experiment(common, ablations);
  }
  catch (const Error& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  catch (const std::exception& e)
  {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
