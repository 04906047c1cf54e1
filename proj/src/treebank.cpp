#include "spanboot/treebank.hpp"

#include "spanboot/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace spanboot
{

void sort_unique(SpanSet& spans)
{
  std::sort(spans.begin(), spans.end());
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
}

namespace
{

bool is_space(char c)
{
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

} // namespace

Sentence make_sentence(std::int64_t id, std::vector<std::string> tokens)
{
  if (tokens.empty())
    throw Error(ErrorKind::Format, "sentence " + std::to_string(id) + " has no tokens");
  for (const auto& token : tokens)
  {
    if (token.empty())
      throw Error(ErrorKind::Format, "sentence " + std::to_string(id) + " has an empty token");
    if (std::any_of(token.begin(), token.end(), is_space))
      throw Error(ErrorKind::Format, "token '" + token + "' contains whitespace");
  }
  return Sentence{id, std::move(tokens)};
}

std::vector<std::string> split_tokens(std::string_view line)
{
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < line.size())
  {
    while (pos < line.size() && is_space(line[pos]))
      ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !is_space(line[pos]))
      ++pos;
    if (pos > start)
      tokens.emplace_back(line.substr(start, pos - start));
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Bracketed trees

namespace
{

enum class Tok
{
  Open,
  Close,
  Atom,
  End
};

class Lexer
{
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Tok peek()
  {
    skip_space();
    if (pos_ >= text_.size())
      return Tok::End;
    if (text_[pos_] == '(')
      return Tok::Open;
    if (text_[pos_] == ')')
      return Tok::Close;
    return Tok::Atom;
  }

  void advance() { ++pos_; }

  std::string atom()
  {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

private:
  void skip_space()
  {
    while (pos_ < text_.size() && is_space(text_[pos_]))
      ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Parses after the opening bracket has been consumed.
TreeNode parse_node(Lexer& lex, std::vector<std::string>& tokens, bool is_root)
{
  TreeNode node;
  if (lex.peek() == Tok::Atom)
    node.label = lex.atom();

  std::vector<TreeNode> children;
  for (;;)
  {
    const Tok t = lex.peek();
    if (t == Tok::End)
      throw Error(ErrorKind::UnbalancedBrackets, "missing ')'");
    if (t == Tok::Close)
    {
      lex.advance();
      break;
    }
    if (t == Tok::Open)
    {
      lex.advance();
      children.push_back(parse_node(lex, tokens, false));
    }
    else
    {
      TreeNode leaf;
      leaf.leaf = static_cast<int>(tokens.size());
      tokens.push_back(lex.atom());
      children.push_back(std::move(leaf));
    }
  }

  if (node.label.empty())
  {
    if (is_root && children.size() == 1 && !children.front().label.empty())
      return std::move(children.front());
    if (children.empty())
      throw Error(ErrorKind::EmptyTree, "empty brackets");
    throw Error(ErrorKind::EmptyLabel, "bracket without a label");
  }
  if (children.empty())
    throw Error(ErrorKind::EmptyTree, "node '" + node.label + "' has no children");

  // (TAG word) is a labeled leaf.
  if (children.size() == 1 && children.front().is_leaf() && children.front().label.empty())
  {
    node.leaf = children.front().leaf;
    return node;
  }
  node.children = std::move(children);
  return node;
}

GoldTree parse_one(Lexer& lex, std::int64_t id)
{
  if (lex.peek() != Tok::Open)
    throw Error(ErrorKind::EmptyTree, "expected '('");
  lex.advance();
  std::vector<std::string> tokens;
  TreeNode root = parse_node(lex, tokens, true);
  if (root.is_leaf())
  {
    // `(X a)`: keep an internal root above the single token.
    TreeNode leaf;
    leaf.leaf = root.leaf;
    root.leaf = -1;
    root.children.push_back(std::move(leaf));
  }
  return GoldTree{make_sentence(id, std::move(tokens)), std::move(root)};
}

void write_node(const TreeNode& node, const std::vector<std::string>& tokens, std::string& out)
{
  if (node.is_leaf())
  {
    if (node.label.empty())
    {
      out += tokens[node.leaf];
    }
    else
    {
      out += '(';
      out += node.label;
      out += ' ';
      out += tokens[node.leaf];
      out += ')';
    }
    return;
  }
  out += '(';
  out += node.label;
  for (const auto& child : node.children)
  {
    out += ' ';
    write_node(child, tokens, out);
  }
  out += ')';
}

} // namespace

GoldTree parse_bracketed(std::string_view text, std::int64_t id)
{
  Lexer lex(text);
  if (lex.peek() == Tok::End)
    throw Error(ErrorKind::EmptyTree, "no tree in input");
  if (lex.peek() == Tok::Close)
    throw Error(ErrorKind::UnbalancedBrackets, "unexpected ')'");
  GoldTree tree = parse_one(lex, id);
  const Tok rest = lex.peek();
  if (rest == Tok::Close)
    throw Error(ErrorKind::UnbalancedBrackets, "unexpected ')'");
  if (rest != Tok::End)
    throw Error(ErrorKind::Format, "trailing input after tree");
  return tree;
}

std::vector<GoldTree> parse_treebank(std::string_view text)
{
  Lexer lex(text);
  std::vector<GoldTree> trees;
  for (;;)
  {
    const Tok t = lex.peek();
    if (t == Tok::End)
      break;
    if (t == Tok::Close)
      throw Error(ErrorKind::UnbalancedBrackets, "unexpected ')' after tree " + std::to_string(trees.size()));
    if (t == Tok::Atom)
      throw Error(ErrorKind::Format, "token outside brackets after tree " + std::to_string(trees.size()));
    trees.push_back(parse_one(lex, static_cast<std::int64_t>(trees.size())));
  }
  return trees;
}

std::vector<GoldTree> read_treebank(const std::filesystem::path& path)
{
  return parse_treebank(read_file(path));
}

std::string to_bracketed(const GoldTree& tree)
{
  std::string out;
  write_node(tree.root, tree.sentence.tokens, out);
  return out;
}

namespace
{

std::string escape_token(const std::string& token)
{
  if (token == "(")
    return "-LRB-";
  if (token == ")")
    return "-RRB-";
  return token;
}

void write_binary(const BinaryTree& tree, Span span, std::string& out)
{
  if (span.length() == 1)
  {
    out += escape_token(tree.sentence.tokens[span.i]);
    return;
  }
  // Left child is the longest span in the set starting at i and ending before j.
  int split = span.i;
  for (int k = span.j - 1; k > span.i; --k)
  {
    if (std::binary_search(tree.spans.begin(), tree.spans.end(), Span{span.i, k}))
    {
      split = k;
      break;
    }
  }
  out += "(X ";
  write_binary(tree, Span{span.i, split}, out);
  out += ' ';
  write_binary(tree, Span{split + 1, span.j}, out);
  out += ')';
}

void collect_internal(const TreeNode& node, int& next_leaf, SpanSet& spans, int& first, int& last)
{
  if (node.is_leaf())
  {
    first = last = node.leaf;
    ++next_leaf;
    return;
  }
  int lo = -1, hi = -1;
  for (std::size_t c = 0; c < node.children.size(); ++c)
  {
    int f = 0, l = 0;
    collect_internal(node.children[c], next_leaf, spans, f, l);
    if (c == 0)
      lo = f;
    hi = l;
  }
  first = lo;
  last = hi;
  spans.push_back(Span{lo, hi});
}

} // namespace

std::string to_bracketed(const BinaryTree& tree)
{
  const int n = tree.sentence.size();
  if (n == 1)
    return "(X " + escape_token(tree.sentence.tokens[0]) + ")";
  std::string out;
  write_binary(tree, Span{0, n - 1}, out);
  return out;
}

BinaryTree parse_binary_tree(std::string_view text, std::int64_t id)
{
  GoldTree tree = parse_bracketed(text, id);
  SpanSet spans;
  int next = 0, first = 0, last = 0;
  collect_internal(tree.root, next, spans, first, last);
  sort_unique(spans);
  const int n = tree.sentence.size();
  if (n > 1)
    spans.erase(std::remove_if(spans.begin(), spans.end(), [](const Span& s) { return s.length() < 2; }),
                spans.end());
  if (n > 1 && static_cast<int>(spans.size()) != n - 1)
    throw Error(ErrorKind::Format, "tree is not binary: " + std::string(text.substr(0, 80)));
  return BinaryTree{std::move(tree.sentence), std::move(spans)};
}

// ---------------------------------------------------------------------------
// Normalization

const std::set<std::string>& default_punctuation_tags()
{
  static const std::set<std::string> tags = {",", ".", ":", "``", "''", "-LRB-", "-RRB-"};
  return tags;
}

namespace
{

struct Normalizer
{
  const NormalizeOptions& options;
  const std::vector<std::string>& old_tokens;
  std::vector<std::string> tokens;

  bool drop_leaf(const TreeNode& leaf) const
  {
    if (options.drop_empty_elements && leaf.label == "-NONE-")
      return true;
    return options.drop_punct && !leaf.label.empty() && options.punct_tags.count(leaf.label) > 0;
  }

  // Returns false when the node disappears.
  bool rebuild(const TreeNode& node, TreeNode& out, bool is_root)
  {
    if (node.is_leaf())
    {
      if (drop_leaf(node))
        return false;
      out.label = node.label;
      out.leaf = static_cast<int>(tokens.size());
      tokens.push_back(old_tokens[node.leaf]);
      return true;
    }
    out.label = node.label;
    for (const auto& child : node.children)
    {
      TreeNode rebuilt;
      if (rebuild(child, rebuilt, false))
        out.children.push_back(std::move(rebuilt));
    }
    if (out.children.empty())
      return false;
    if (options.collapse_unary && !is_root)
    {
      while (out.children.size() == 1)
      {
        TreeNode only = std::move(out.children.front());
        only.label = out.label;
        out = std::move(only);
        if (out.is_leaf())
          break;
      }
    }
    return true;
  }
};

} // namespace

GoldTree normalize(const GoldTree& tree, const NormalizeOptions& options)
{
  Normalizer norm{options, tree.sentence.tokens, {}};
  TreeNode root;
  if (!norm.rebuild(tree.root, root, true))
    throw Error(ErrorKind::AllTokensRemoved, "normalization removed every token of sentence " +
                                                 std::to_string(tree.sentence.id));
  if (root.is_leaf())
  {
    TreeNode leaf;
    leaf.leaf = root.leaf;
    root.leaf = -1;
    root.children.push_back(std::move(leaf));
  }
  return GoldTree{Sentence{tree.sentence.id, std::move(norm.tokens)}, std::move(root)};
}

// ---------------------------------------------------------------------------
// Spans

namespace
{

Span collect_labeled(const TreeNode& node, std::vector<LabeledSpan>& out)
{
  if (node.is_leaf())
    return Span{node.leaf, node.leaf};
  const std::size_t slot = out.size();
  out.push_back(LabeledSpan{{}, node.label});
  Span covered{-1, -1};
  for (const auto& child : node.children)
  {
    const Span s = collect_labeled(child, out);
    if (covered.i < 0)
      covered.i = s.i;
    covered.j = s.j;
  }
  out[slot].span = covered;
  return covered;
}

} // namespace

std::vector<LabeledSpan> labeled_spans(const GoldTree& tree)
{
  std::vector<LabeledSpan> out;
  collect_labeled(tree.root, out);
  return out;
}

SpanSet gold_spans(const GoldTree& tree, bool exclude_trivial)
{
  const int n = tree.sentence.size();
  SpanSet spans;
  for (const auto& ls : labeled_spans(tree))
  {
    if (exclude_trivial && (ls.span.length() == 1 || ls.span == Span{0, n - 1}))
      continue;
    spans.push_back(ls.span);
  }
  sort_unique(spans);
  return spans;
}

std::string strip_function_tags(std::string_view label)
{
  if (label.empty() || label.front() == '-')
    return std::string(label);
  const auto cut = label.find_first_of("-=");
  return std::string(label.substr(0, cut));
}

bool is_punctuation_token(std::string_view token)
{
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; });
}

void strip_trailing_punctuation(std::vector<std::string>& tokens)
{
  while (tokens.size() > 1 && is_punctuation_token(tokens.back()))
    tokens.pop_back();
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out)
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::vector<Sentence> read_corpus(const std::filesystem::path& path, const CorpusOptions& options)
{
  const std::string text = read_file(path);
  std::vector<Sentence> corpus;

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '(')
  {
    for (auto& tree : parse_treebank(text))
    {
      GoldTree norm = normalize(tree, options.normalize);
      corpus.push_back(Sentence{static_cast<std::int64_t>(corpus.size()), std::move(norm.sentence.tokens)});
    }
  }
  else
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line))
    {
      auto tokens = split_tokens(line);
      if (tokens.empty())
        continue;
      if (options.strip_trailing_punct)
        strip_trailing_punctuation(tokens);
      corpus.push_back(make_sentence(static_cast<std::int64_t>(corpus.size()), std::move(tokens)));
    }
  }
  if (corpus.empty())
    throw Error(ErrorKind::EmptyCorpus, path.string() + " contains no sentences");
  return corpus;
}

} // namespace spanboot
