#include "spanboot/error.hpp"
#include "spanboot/treebank.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace spanboot;

namespace
{

ErrorKind kind_of(const std::function<void()>& f)
{
  try
  {
    f();
  }
  catch (const Error& e)
  {
    return e.kind();
  }
  ADD_FAILURE() << "no spanboot::Error thrown";
  return ErrorKind::Format;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents)
{
  const auto path = std::filesystem::temp_directory_path() / ("spanboot_tb_" + name);
  write_file(path, contents);
  return path;
}

} // namespace

TEST(ParseBracketed, ReadsYieldAndLabels)
{
  const GoldTree t = parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VB ran)))");
  EXPECT_EQ(t.sentence.tokens, (std::vector<std::string>{"the", "dog", "ran"}));
  EXPECT_EQ(t.root.label, "S");
  const auto labeled = labeled_spans(t);
  EXPECT_NE(std::find(labeled.begin(), labeled.end(), LabeledSpan{{0, 1}, "NP"}), labeled.end());
}

TEST(ParseBracketed, SingleLeafUnaryChain)
{
  const GoldTree t = parse_bracketed("(X (A a))");
  ASSERT_EQ(t.sentence.size(), 1);
  EXPECT_EQ(t.root.label, "X");
  ASSERT_EQ(t.root.children.size(), 1u);
  EXPECT_EQ(t.root.children[0].label, "A");
  EXPECT_TRUE(t.root.children[0].is_leaf());
}

TEST(ParseBracketed, Errors)
{
  EXPECT_EQ(kind_of([] { parse_bracketed("(S (NP"); }), ErrorKind::UnbalancedBrackets);
  EXPECT_EQ(kind_of([] { parse_bracketed("(S a))"); }), ErrorKind::UnbalancedBrackets);
  EXPECT_EQ(kind_of([] { parse_bracketed("()"); }), ErrorKind::EmptyTree);
  EXPECT_EQ(kind_of([] { parse_bracketed("   "); }), ErrorKind::EmptyTree);
  EXPECT_EQ(kind_of([] { parse_bracketed("(S (NP a) ( ))"); }), ErrorKind::EmptyTree);
}

TEST(ParseBracketed, UnwrapsPtbOuterParens)
{
  const GoldTree t = parse_bracketed("( (S (NP a b) c) )");
  EXPECT_EQ(t.root.label, "S");
  EXPECT_EQ(to_bracketed(t), "(S (NP a b) c)");
}

TEST(ParseBracketed, RoundTripModuloWhitespace)
{
  const std::vector<std::string> trees = {
      "(S (NP (DT the) (NN dog)) (VP (VB ran)))",
      "(S (NP-SBJ-1 Denis C. Smith) (VP was (VP named)))",
      "(ROOT (S (, ,) (NP a) (. .)))",
      "(X w)",
  };
  for (const auto& text : trees)
  {
    const GoldTree t = parse_bracketed(text);
    EXPECT_EQ(to_bracketed(t), text);
    std::string spaced = "\n  " + text + "  \n";
    for (std::size_t p = spaced.find(' ', 4); p != std::string::npos; p = spaced.find(' ', p + 3))
      spaced.replace(p, 1, " \t ");
    EXPECT_EQ(to_bracketed(parse_bracketed(spaced)), text);
  }
}

TEST(Normalize, DropsPunctuationAndCollapsesUnary)
{
  const GoldTree t = normalize(parse_bracketed("(S (NP (DT the) (NN dog)) (. .))"));
  EXPECT_EQ(t.sentence.tokens, (std::vector<std::string>{"the", "dog"}));
  EXPECT_EQ(to_bracketed(t), "(S (NP (DT the) (NN dog)))");
}

TEST(Normalize, IdentityWithoutPunctuationOrUnary)
{
  const std::string text = "(S (NP (DT the) (NN dog)) (VP (VB ran) (ADV far)))";
  EXPECT_EQ(to_bracketed(normalize(parse_bracketed(text))), text);
}

TEST(Normalize, AllPunctuationThrows)
{
  EXPECT_EQ(kind_of([] { normalize(parse_bracketed("(S (, ,) (, ,))")); }), ErrorKind::AllTokensRemoved);
}

TEST(Normalize, UnaryChainKeepsTopmostLabel)
{
  const GoldTree t = normalize(parse_bracketed("(S (NP (NP (DT the) (NN dog))) (VP (VB ran)))"));
  EXPECT_EQ(to_bracketed(t), "(S (NP (DT the) (NN dog)) (VP ran))");
}

TEST(Normalize, RemovesEmptyElementsAndRepacks)
{
  const GoldTree t = normalize(parse_bracketed("(S (NP-SBJ (-NONE- *T*-1)) (VP (VB ran) (, ,) (NP (NN home))))"));
  EXPECT_EQ(t.sentence.tokens, (std::vector<std::string>{"ran", "home"}));
  for (const auto& ls : labeled_spans(t))
    EXPECT_TRUE(t.sentence.valid(ls.span));
}

TEST(Normalize, Idempotent)
{
  const std::vector<std::string> trees = {
      "(S (NP (DT the) (NN dog)) (. .))",
      "(S (NP (NP (DT the) (NN dog))) (VP (VB ran)) (, ,) (ADVP (RB now)))",
      "(TOP (S (-NONE- *) (NP (NNP A) (NNP B)) (`` ``) (VP (VBD said))))",
  };
  for (const auto& text : trees)
  {
    const GoldTree once = normalize(parse_bracketed(text));
    EXPECT_EQ(to_bracketed(normalize(once)), to_bracketed(once)) << text;
  }
}

TEST(GoldSpans, ExcludeTrivial)
{
  EXPECT_EQ(gold_spans(parse_bracketed("(S (NP a b) c)"), true), (SpanSet{{0, 1}}));
  EXPECT_TRUE(gold_spans(parse_bracketed("(S (NP a) (VP b))"), true).empty());
  EXPECT_TRUE(gold_spans(parse_bracketed("(S a b)"), true).empty());
}

TEST(GoldSpans, SizeBoundAndNoTrivial)
{
  const GoldTree t = normalize(parse_bracketed("(S (NP (NP a b) (PP c (NP d e))) (VP f (NP g)) (. .))"));
  const int n = t.sentence.size();
  const SpanSet all = gold_spans(t, false);
  const SpanSet nontrivial = gold_spans(t, true);
  EXPECT_LE(all.size(), labeled_spans(t).size());
  for (const Span& s : nontrivial)
  {
    EXPECT_GT(s.length(), 1);
    EXPECT_LT(s.length(), n);
  }
}

TEST(GoldSpans, NewsFixtureSpans)
{
  const GoldTree gold = normalize(parse_treebank(read_file(SPANBOOT_TEST_DATA "/news_gold.tree")).at(0));
  const auto& tok = gold.sentence.tokens;
  auto index_of = [&](const std::string& w, int from = 0) {
    return static_cast<int>(std::find(tok.begin() + from, tok.end(), w) - tok.begin());
  };
  const SpanSet spans = gold_spans(gold, true);
  const int to = index_of("to");
  const int the = index_of("the");
  EXPECT_TRUE(std::binary_search(spans.begin(), spans.end(), Span{to, gold.sentence.size() - 1}));
  EXPECT_TRUE(std::binary_search(spans.begin(), spans.end(), Span{the, the + 2}));
  bool pp_clr = false;
  for (const auto& ls : labeled_spans(gold))
    pp_clr |= ls.label == "PP-CLR" && ls.span == Span{to, gold.sentence.size() - 1};
  EXPECT_TRUE(pp_clr);
}

TEST(StripFunctionTags, Basic)
{
  EXPECT_EQ(strip_function_tags("NP-SBJ-1"), "NP");
  EXPECT_EQ(strip_function_tags("PP=2"), "PP");
  EXPECT_EQ(strip_function_tags("-NONE-"), "-NONE-");
  EXPECT_EQ(strip_function_tags("-LRB-"), "-LRB-");
  EXPECT_EQ(strip_function_tags("S"), "S");
}

TEST(BinaryTreeText, RoundTrip)
{
  const BinaryTree t = parse_binary_tree("(X (X a b) c)");
  EXPECT_EQ(t.spans, (SpanSet{{0, 1}, {0, 2}}));
  EXPECT_EQ(to_bracketed(t), "(X (X a b) c)");
  EXPECT_EQ(to_bracketed(parse_binary_tree("(X w)")), "(X w)");
}

TEST(ReadCorpus, PlainLines)
{
  const auto path = temp_file("plain.txt", "the dog ran .\n\n  a cat sat  \n");
  const auto corpus = read_corpus(path);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].id, 0);
  EXPECT_EQ(corpus[1].id, 1);
  EXPECT_EQ(corpus[1].tokens, (std::vector<std::string>{"a", "cat", "sat"}));
  CorpusOptions strip;
  strip.strip_trailing_punct = true;
  EXPECT_EQ(read_corpus(path, strip)[0].tokens, (std::vector<std::string>{"the", "dog", "ran"}));
}

TEST(ReadCorpus, BracketedYieldsAreNormalized)
{
  const auto path = temp_file("trees.mrg", "(S (NP (DT the) (NN dog)) (. .))\n( (S (NP a) (VP b)) )\n");
  const auto corpus = read_corpus(path);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].tokens, (std::vector<std::string>{"the", "dog"}));
  EXPECT_EQ(corpus[1].tokens, (std::vector<std::string>{"a", "b"}));
}

TEST(ReadCorpus, Errors)
{
  const auto empty = temp_file("empty.txt", "\n  \n");
  EXPECT_EQ(kind_of([&] { read_corpus(empty); }), ErrorKind::EmptyCorpus);
  EXPECT_EQ(kind_of([] { read_corpus("/nonexistent/spanboot/corpus.txt"); }), ErrorKind::IoError);
}

TEST(Sentence, Invariants)
{
  EXPECT_EQ(kind_of([] { make_sentence(0, {}); }), ErrorKind::Format);
  EXPECT_EQ(kind_of([] { make_sentence(0, {"a", ""}); }), ErrorKind::Format);
  EXPECT_EQ(kind_of([] { make_sentence(0, {"a b"}); }), ErrorKind::Format);
  EXPECT_NO_THROW(make_sentence(3, {"a", "b"}));
}

TEST(TrailingPunctuation, StripsOnlyTheTail)
{
  std::vector<std::string> tokens{"``", "Hi", ",", "there", "!", "''", "."};
  strip_trailing_punctuation(tokens);
  EXPECT_EQ(tokens, (std::vector<std::string>{"``", "Hi", ",", "there"}));
  std::vector<std::string> only{".", "."};
  strip_trailing_punctuation(only);
  EXPECT_EQ(only.size(), 1u);
}
