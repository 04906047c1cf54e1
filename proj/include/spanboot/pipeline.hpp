#pragma once

#include "spanboot/bootstrap_loops.hpp"
#include "spanboot/decoder.hpp"
#include "spanboot/eval.hpp"
#include "spanboot/seed_bootstrap.hpp"
#include "spanboot/span_scorer.hpp"
#include "spanboot/treebank.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spanboot
{

enum class ScorerBackend
{
  Builtin,
  External
};

struct PipelineConfig
{
  std::filesystem::path corpus;
  std::filesystem::path gold;
  std::filesystem::path model_dir = "models";
  std::filesystem::path report_dir = "reports";

  SeedConfig seed;
  bool tune_slices = false;
  TrainOptions train;
  LoopConfig self_train;
  LoopConfig co_train;
  bool heuristics = false;
  std::size_t heuristic_top_k = 100;
  EvalConfig eval;
  bool renormalize = false;

  ScorerBackend backend = ScorerBackend::Builtin;
  std::string inside_command;
  std::string outside_command;
  int scorer_timeout_ms = 30000;

  std::uint64_t rng_seed = 0;

  PipelineConfig();

  // Copies rng_seed and the shared training options into every stage.
  void propagate();
  void validate() const;
};

/// Default config as JSON. Every key can be set from a config file and from an
/// environment variable SPANBOOT_<SECTION>_<KEY> (e.g. SPANBOOT_SELF_TRAIN_C,
/// SPANBOOT_RNG_SEED); env values are read as JSON, falling back to a string.
std::string default_config_json();

/// Config file contents (may be empty) merged over the defaults, then env
/// overrides. `getenv` is injectable for tests. Throws Error(InvalidConfig).
PipelineConfig load_config(std::string_view file_text,
                           const std::function<const char*(const char*)>& getenv = nullptr);

// The effective config, in the same layout as default_config_json().
std::string config_to_json(const PipelineConfig& config);

/// Decodes every sentence. With `outside`, cells are s_in * s_out. With
/// heuristics enabled the chart is refined before decoding.
std::vector<BinaryTree> parse_sentences(std::span<const Sentence> sentences, const Scorer& inside,
                                        const Scorer* outside, const HeuristicConfig& heuristics, bool renormalize);

std::string format_predictions(std::span<const BinaryTree> trees);

// Inside/outside scorers as the config selects: a model file or a subprocess.
std::unique_ptr<Scorer> load_scorer(const PipelineConfig& config, const std::filesystem::path& model, View view);

/// F1 of every stage of the recipe on one corpus with gold trees, used by the
/// report command and by the acceptance experiments.
struct StagedResult
{
  double left_branching = 0.0;
  double right_branching = 0.0;
  double inside = 0.0;       // inside model trained on the seeds
  double self_trained = 0.0; // inside model after self-training
  double co_trained = 0.0;   // s_in * s_out after co-training
  std::optional<double> concat;
  std::optional<double> random_slices;
  LoopTrace self_trace;
  LoopTrace co_trace;
};

struct StagedOptions
{
  bool concat = false;
  bool random_slices = false;
};

StagedResult run_staged(std::span<const GoldTree> golds, const PipelineConfig& config, const StagedOptions& options = {});

// Sentences of the gold trees, ids reset to positions.
std::vector<Sentence> sentences_of(std::span<const GoldTree> golds);

} // namespace spanboot
