#include "spanboot/synth.hpp"

#include "spanboot/error.hpp"
#include "spanboot/random.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <cctype>
#include <cmath>

namespace spanboot
{

namespace
{

constexpr double kProbabilityTolerance = 1e-9;

std::map<std::string, int> nonterminal_index(const SyntheticGrammar& g)
{
  std::map<std::string, int> index;
  for (const auto& r : g.rules)
    index.emplace(r.lhs, static_cast<int>(index.size()));
  return index;
}

} // namespace

void SyntheticGrammar::validate() const
{
  if (start.empty())
    throw Error(ErrorKind::InvalidConfig, "grammar has no start symbol");
  if (!(branching_bias >= 0.0 && branching_bias <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "branching_bias must be in [0, 1]");
  std::map<std::string, double> mass;
  for (const auto& r : rules)
  {
    if (r.rhs.empty())
      throw Error(ErrorKind::InvalidConfig, "rule for " + r.lhs + " has an empty right-hand side");
    if (!(r.prob >= 0.0))
      throw Error(ErrorKind::InvalidConfig, "rule for " + r.lhs + " has a negative probability");
    if (lexicon.count(r.lhs))
      throw Error(ErrorKind::InvalidConfig, r.lhs + " is both a nonterminal and a preterminal");
    mass[r.lhs] += r.prob;
  }
  for (const auto& [lhs, total] : mass)
    if (std::abs(total - 1.0) > kProbabilityTolerance)
      throw Error(ErrorKind::InvalidConfig, "rule probabilities for " + lhs + " sum to " + std::to_string(total));
  for (const auto& [tag, words] : lexicon)
  {
    if (words.empty())
      throw Error(ErrorKind::InvalidConfig, "preterminal " + tag + " has no words");
    for (const auto& w : words)
      if (w.empty() || w.find_first_of(" \t\n()") != std::string::npos)
        throw Error(ErrorKind::InvalidConfig, "bad word '" + w + "' for " + tag);
  }
  auto defined = [&](const std::string& sym) { return mass.count(sym) || lexicon.count(sym); };
  if (!defined(start))
    throw Error(ErrorKind::InvalidConfig, "start symbol " + start + " is undefined");
  for (const auto& r : rules)
    for (const auto& sym : r.rhs)
      if (!defined(sym))
        throw Error(ErrorKind::InvalidConfig, "symbol " + sym + " is undefined");
}

SyntheticGrammar parse_grammar(std::string_view json)
{
  SyntheticGrammar g;
  try
  {
    const auto j = nlohmann::json::parse(json);
    g.start = j.at("start").get<std::string>();
    g.branching_bias = j.value("branching_bias", 0.5);
    for (const auto& r : j.at("rules"))
      g.rules.push_back(GrammarRule{r.at("lhs").get<std::string>(), r.at("rhs").get<std::vector<std::string>>(),
                                    r.at("p").get<double>()});
    for (const auto& [tag, words] : j.at("lexicon").items())
      g.lexicon[tag] = words.get<std::vector<std::string>>();
  }
  catch (const nlohmann::json::exception& e)
  {
    throw Error(ErrorKind::InvalidConfig, std::string("malformed grammar: ") + e.what());
  }
  g.validate();
  return g;
}

SyntheticGrammar load_grammar(const std::filesystem::path& path)
{
  return parse_grammar(read_file(path));
}

double offspring_spectral_radius(const SyntheticGrammar& grammar)
{
  const auto index = nonterminal_index(grammar);
  const auto n = static_cast<Eigen::Index>(index.size());
  if (n == 0)
    return 0.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& r : grammar.rules)
    for (const auto& sym : r.rhs)
      if (auto it = index.find(sym); it != index.end())
        m(index.at(r.lhs), it->second) += r.prob;
  return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

std::map<std::string, double> expected_yield(const SyntheticGrammar& grammar)
{
  if (offspring_spectral_radius(grammar) >= 1.0)
    throw Error(ErrorKind::NonterminatingGrammar, "expected-offspring spectral radius is >= 1");
  // E = b + M E, with b counting preterminal children.
  const auto index = nonterminal_index(grammar);
  const auto n = static_cast<Eigen::Index>(index.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (const auto& r : grammar.rules)
  {
    const int row = index.at(r.lhs);
    for (const auto& sym : r.rhs)
    {
      if (auto it = index.find(sym); it != index.end())
        m(row, it->second) += r.prob;
      else
        b(row) += r.prob;
    }
  }
  const Eigen::VectorXd e = (Eigen::MatrixXd::Identity(n, n) - m).partialPivLu().solve(b);
  std::map<std::string, double> out;
  for (const auto& [sym, k] : index)
    out[sym] = e(k);
  for (const auto& [tag, words] : grammar.lexicon)
    out[tag] = 1.0;
  return out;
}

SyntheticGrammar apply_branching_bias(const SyntheticGrammar& grammar)
{
  grammar.validate();
  SyntheticGrammar out = grammar;
  if (grammar.branching_bias == 0.5)
    return out;
  const auto length = expected_yield(grammar);
  std::map<std::string, double> mass;
  for (auto& r : out.rules)
  {
    if (r.rhs.size() >= 2)
    {
      const double first = length.at(r.rhs.front());
      const double last = length.at(r.rhs.back());
      if (last > first)
        r.prob *= 2.0 * grammar.branching_bias;
      else if (first > last)
        r.prob *= 2.0 * (1.0 - grammar.branching_bias);
    }
    mass[r.lhs] += r.prob;
  }
  for (auto& r : out.rules)
  {
    if (mass[r.lhs] <= 0.0)
      throw Error(ErrorKind::InvalidConfig, "branching bias leaves " + r.lhs + " without rules");
    r.prob /= mass[r.lhs];
  }
  out.branching_bias = 0.5;
  return out;
}

namespace
{

class Sampler
{
public:
  Sampler(const SyntheticGrammar& g, const SampleOptions& options, Rng& rng) : g_(g), options_(options), rng_(rng)
  {
    for (std::size_t k = 0; k < g.rules.size(); ++k)
      by_lhs_[g.rules[k].lhs].push_back(k);
  }

  // False when a guard fired; the partial result is then discarded.
  bool expand(const std::string& symbol, int depth, TreeNode& node, std::vector<std::string>& words)
  {
    if (depth > options_.max_depth || static_cast<int>(words.size()) > options_.max_len)
      return false;
    node.label = symbol;
    if (auto lex = g_.lexicon.find(symbol); lex != g_.lexicon.end())
    {
      node.leaf = static_cast<int>(words.size());
      words.push_back(lex->second[uniform_index(rng_, lex->second.size())]);
      return true;
    }
    const GrammarRule& rule = g_.rules[pick(by_lhs_.at(symbol))];
    node.children.resize(rule.rhs.size());
    for (std::size_t k = 0; k < rule.rhs.size(); ++k)
      if (!expand(rule.rhs[k], depth + 1, node.children[k], words))
        return false;
    return true;
  }

private:
  std::size_t pick(const std::vector<std::size_t>& candidates)
  {
    const double u = uniform_real(rng_);
    double acc = 0.0;
    for (auto k : candidates)
    {
      acc += g_.rules[k].prob;
      if (u < acc)
        return k;
    }
    return candidates.back();
  }

  const SyntheticGrammar& g_;
  const SampleOptions& options_;
  Rng& rng_;
  std::map<std::string, std::vector<std::size_t>> by_lhs_;
};

} // namespace

std::vector<GoldTree> sample_corpus(const SyntheticGrammar& grammar, std::size_t count, std::uint64_t seed,
                                    const SampleOptions& options)
{
  if (options.min_len < 1 || options.max_len < options.min_len || options.max_depth < 1)
    throw Error(ErrorKind::InvalidConfig, "invalid sample length or depth bounds");
  const SyntheticGrammar g = apply_branching_bias(grammar);
  if (offspring_spectral_radius(g) >= 1.0)
    throw Error(ErrorKind::NonterminatingGrammar, "expected-offspring spectral radius is >= 1");

  Rng rng(seed);
  Sampler sampler(g, options, rng);
  const std::size_t max_failures = 10000;
  std::size_t failures = 0;
  std::vector<GoldTree> out;
  out.reserve(count);
  while (out.size() < count)
  {
    TreeNode root;
    std::vector<std::string> words;
    const bool ok = sampler.expand(g.start, 0, root, words);
    const int n = static_cast<int>(words.size());
    if (!ok || n < options.min_len || n > options.max_len)
    {
      if (++failures >= max_failures)
        throw Error(ErrorKind::NonterminatingGrammar,
                    "no derivation within the depth and length bounds after " + std::to_string(failures) + " draws");
      continue;
    }
    failures = 0;
    if (options.capitalize_first && !words.front().empty())
      words.front()[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(words.front()[0])));
    if (root.is_leaf())
    {
      TreeNode wrapper;
      wrapper.label = g.start;
      wrapper.children.push_back(std::move(root));
      root = std::move(wrapper);
    }
    const auto id = static_cast<std::int64_t>(out.size());
    out.push_back(GoldTree{make_sentence(id, std::move(words)), std::move(root)});
  }
  return out;
}

} // namespace spanboot
