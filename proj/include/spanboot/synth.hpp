#pragma once

#include "spanboot/treebank.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace spanboot
{

struct GrammarRule
{
  std::string lhs;
  std::vector<std::string> rhs;
  double prob = 0.0;
};

/// PCFG over nonterminals (symbols with rules) and preterminals (symbols with
/// a word list, drawn uniformly).
///
/// JSON form:
///   {"start": "S", "branching_bias": 0.5,
///    "rules": [{"lhs": "S", "rhs": ["NP", "VP"], "p": 1.0}, ...],
///    "lexicon": {"DT": ["the", "a"], ...}}
struct SyntheticGrammar
{
  std::string start;
  std::vector<GrammarRule> rules;
  std::map<std::string, std::vector<std::string>> lexicon;
  // 0.5 leaves rule weights alone; larger values favour rules whose last child
  // is expected to be longer than the first.
  double branching_bias = 0.5;

  /// Checks that every symbol is defined exactly once as nonterminal or
  /// preterminal, probabilities per left-hand side sum to 1 and the bias is in
  /// [0, 1]. Throws Error(InvalidConfig).
  void validate() const;
};

SyntheticGrammar parse_grammar(std::string_view json);
SyntheticGrammar load_grammar(const std::filesystem::path& path);

/// Largest |eigenvalue| of the expected-offspring matrix over nonterminals.
/// Derivations terminate with probability 1 and have finite expected size
/// exactly when this is below 1.
double offspring_spectral_radius(const SyntheticGrammar& grammar);

// Expected yield length of every symbol. Throws Error(NonterminatingGrammar).
std::map<std::string, double> expected_yield(const SyntheticGrammar& grammar);

/// Multiplies rules whose last child has a longer expected yield than the
/// first by 2b and the reverse by 2(1 - b), then renormalizes per left-hand
/// side. Rules with one child or balanced ends keep their weight.
SyntheticGrammar apply_branching_bias(const SyntheticGrammar& grammar);

struct SampleOptions
{
  int min_len = 2;
  int max_len = 40;
  // Derivations deeper than this are discarded and redrawn.
  int max_depth = 60;
  // Upper-cases the first letter of each sentence.
  bool capitalize_first = true;
};

/// Draws `count` derivations with min_len <= yield length <= max_len, each as
/// a gold tree with preterminal leaves (`(DT the)`). Deterministic in `seed`.
///
/// Throws Error(NonterminatingGrammar) when the spectral radius is >= 1 or when
/// too many draws in a row hit the depth guard or length window.
std::vector<GoldTree> sample_corpus(const SyntheticGrammar& grammar, std::size_t count, std::uint64_t seed,
                                    const SampleOptions& options = {});

} // namespace spanboot
