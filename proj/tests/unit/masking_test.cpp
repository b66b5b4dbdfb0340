#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "maskfill/error.hpp"
#include "maskfill/corpus.hpp"
#include "maskfill/masking.hpp"
#include "reference_masking.hpp"

using namespace maskfill;
using maskfill::testing::lines_of;

namespace {

std::string first_line(const MaskedCorpus& m) { return m[0].text(); }

class ThrowingTagger : public EntityTagger {
 public:
  std::vector<bool> tag(const Sentence& s) const override {
    if (s.index == 2) throw std::runtime_error("tagger exploded");
    return std::vector<bool>(s.tokens.size(), false);
  }
};

class ShortTagger : public EntityTagger {
 public:
  std::vector<bool> tag(const Sentence&) const override { return {true}; }
};

class AllFalseTagger : public EntityTagger {
 public:
  std::vector<bool> tag(const Sentence& s) const override {
    return std::vector<bool>(s.tokens.size(), false);
  }
};

Corpus random_corpus(std::size_t n, unsigned seed, std::size_t vocab = 40) {
  std::mt19937 gen(seed);
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < n; ++i) {
    std::string line;
    const auto len = 1 + gen() % 12;
    for (std::size_t j = 0; j < len; ++j) {
      const auto w = gen() % vocab;
      line += (gen() % 7 == 0 ? "T" : "t") + std::to_string(w * w % vocab) + " ";
    }
    lines.push_back(line);
  }
  return Corpus::from_lines(lines);
}

}  // namespace

TEST(AllowList, IntroExample) {
  const auto m = mask_allowlist(Corpus::from_lines({"tom lives in chicago"}), {"lives", "in"});
  EXPECT_EQ(first_line(m), "[MASK] lives in [MASK]");
}

TEST(AllowList, AllAllowedIsIdentity) {
  const auto c = Corpus::from_lines({"a b a"});
  EXPECT_EQ(first_line(mask_allowlist(c, {"a", "b"})), "a b a");
}

TEST(AllowList, HandRule) {
  EXPECT_EQ(first_line(mask_allowlist(Corpus::from_lines({"a b a"}), {"a"})), "a [MASK] a");
}

TEST(AllowList, EmptyListRejected) {
  EXPECT_THROW(AllowListPolicy({}), std::invalid_argument);
}

TEST(AllowList, CaseFolding) {
  const auto c = Corpus::from_lines({"Lives IN chicago"});
  EXPECT_EQ(first_line(mask_allowlist(c, {"lives", "in"})), "[MASK] [MASK] [MASK]");
  EXPECT_EQ(first_line(mask_allowlist(c, {"lives", "in"}, true)), "Lives IN [MASK]");
}

TEST(AllowList, MarkerNeverAllowed) {
  const AllowListPolicy p({"[MASK]", "a"});
  EXPECT_FALSE(p.keeps("[MASK]"));
  EXPECT_EQ(p.allow_set().size(), 1u);
}

TEST(VocabThres, HandCount) {
  const FrequencyTable t({{"a", 3}, {"b", 2}, {"c", 1}});
  EXPECT_EQ(first_line(mask_vocabthres(Corpus::from_lines({"a b c"}), t, 2)), "a b [MASK]");
}

TEST(VocabThres, LargeKeepIsIdentity) {
  const FrequencyTable t({{"a", 3}, {"b", 2}, {"c", 1}});
  EXPECT_EQ(first_line(mask_vocabthres(Corpus::from_lines({"c a b"}), t, 3)), "c a b");
  EXPECT_EQ(first_line(mask_vocabthres(Corpus::from_lines({"c a b"}), t, 50)), "c a b");
}

TEST(VocabThres, TieGoesToLexicographicallySmaller) {
  const FrequencyTable t({{"a", 1}, {"b", 1}});
  const VocabThresPolicy p(t, 1);
  EXPECT_EQ(p.keep_set(), (TokenSet{"a"}));
  EXPECT_EQ(first_line(mask_vocabthres(Corpus::from_lines({"b a"}), p)), "[MASK] a");
}

TEST(VocabThres, AbsentTokensMasked) {
  const FrequencyTable t({{"a", 1}});
  EXPECT_EQ(first_line(mask_vocabthres(Corpus::from_lines({"a zz"}), t, 5)), "a [MASK]");
}

TEST(VocabThres, KeepSetSizeIsMinOfNkeepAndDistinct) {
  const FrequencyTable t({{"a", 1}, {"b", 4}, {"c", 2}});
  EXPECT_EQ(VocabThresPolicy(t, 2).keep_set().size(), 2u);
  EXPECT_EQ(VocabThresPolicy(t, 9).keep_set().size(), 3u);
  EXPECT_THROW(VocabThresPolicy(t, 0), std::invalid_argument);
}

TEST(VocabThres, MarkerNeverKept) {
  const FrequencyTable t({{"[MASK]", 10}, {"a", 1}});
  EXPECT_FALSE(VocabThresPolicy(t, 2).keeps("[MASK]"));
}

TEST(Entities, GazetteerOnly) {
  const GazetteerTagger tagger({"chicago"}, false);
  EXPECT_EQ(first_line(mask_entities(Corpus::from_lines({"tom lives in chicago"}), tagger)),
            "tom lives in [MASK]");
}

TEST(Entities, AllFalseIsIdentity) {
  EXPECT_EQ(first_line(mask_entities(Corpus::from_lines({"He met Tom"}), AllFalseTagger{})),
            "He met Tom");
}

TEST(Entities, CapitalizationHeuristic) {
  const GazetteerTagger tagger({}, true);
  EXPECT_EQ(first_line(mask_entities(Corpus::from_lines({"he met Tom"}), tagger)),
            "he met [MASK]");
  // sentence-initial capitals are left alone
  EXPECT_EQ(first_line(mask_entities(Corpus::from_lines({"He met tom"}), tagger)), "He met tom");
}

TEST(Entities, TaggerFailureCarriesSentenceIndex) {
  const auto c = Corpus::from_lines({"a", "b", "c", "d"});
  try {
    mask_entities(c, ThrowingTagger{});
    FAIL() << "expected MaskingError";
  } catch (const MaskingError& e) {
    EXPECT_EQ(e.sentence_index(), 2u);
  }
}

TEST(Entities, WrongLengthIsError) {
  EXPECT_THROW(mask_entities(Corpus::from_lines({"a b"}), ShortTagger{}), MaskingError);
}

TEST(MaskStatsTest, TwoOfEight) {
  const auto m = MaskedCorpus::from_corpus(
      parse_corpus("[MASK] a b c\nd [MASK] e f\n", CorpusKind::kMasked));
  const auto s = mask_stats(m);
  EXPECT_EQ(s.masked_tokens, 2u);
  EXPECT_EQ(s.total_tokens, 8u);
  EXPECT_DOUBLE_EQ(s.percent_masked, 0.25);
  EXPECT_DOUBLE_EQ(s.percent_rounded(), 25.0);
  EXPECT_EQ(s.to_json(), (nlohmann::json{{"masked", 2}, {"total", 8}, {"percent", 25.0}}));
}

TEST(MaskStatsTest, NoMasks) {
  const auto s = mask_stats(MaskedCorpus::from_corpus(Corpus::from_lines({"a b"})));
  EXPECT_EQ(s.masked_tokens, 0u);
  EXPECT_DOUBLE_EQ(s.percent_rounded(), 0.0);
}

TEST(MaskStatsTest, OneDecimal) {
  const auto m = MaskedCorpus::from_corpus(
      parse_corpus("[MASK] a b c d e f g\n", CorpusKind::kMasked));
  EXPECT_DOUBLE_EQ(mask_stats(m).percent_rounded(), 12.5);
  const auto third = MaskedCorpus::from_corpus(parse_corpus("[MASK] a b\n", CorpusKind::kMasked));
  EXPECT_DOUBLE_EQ(mask_stats(third).percent_rounded(), 33.3);
}

TEST(MaskStatsTest, EmptyCorpusRejected) {
  EXPECT_THROW(mask_stats(MaskedCorpus{}), std::invalid_argument);
}

TEST(MaskingProperties, MatchesReferenceAndPreservesLength) {
  const auto corpus = random_corpus(300, 7);
  const auto reference = random_corpus(300, 8);
  const auto lines = lines_of(corpus);

  const std::vector<std::string> allow{"t0", "t1", "t4", "t9", "T16"};
  const auto a = mask_allowlist(corpus, allow);
  EXPECT_EQ(lines_of(a), maskfill::testing::ref_allowlist(lines, allow));

  const auto table = build_frequency_table(reference);
  for (std::size_t n : {1u, 3u, 10u, 25u}) {
    EXPECT_EQ(lines_of(mask_vocabthres(corpus, table, n)),
              maskfill::testing::ref_vocabthres(lines, lines_of(reference), n))
        << "n_keep=" << n;
  }

  const std::vector<std::string> gaz{"t4", "t25"};
  EXPECT_EQ(lines_of(mask_entities(corpus, GazetteerTagger(gaz, true))),
            maskfill::testing::ref_entities(lines, gaz, true));

  for (std::size_t i = 0; i < corpus.size(); ++i) EXPECT_EQ(a[i].size(), corpus[i].tokens.size());
}

TEST(MaskingProperties, VocabThresMonotone) {
  const auto corpus = random_corpus(200, 11);
  const auto table = build_frequency_table(corpus);
  auto previous = mask_vocabthres(corpus, table, table.distinct());
  for (std::size_t n = table.distinct(); n-- > 1;) {
    const auto current = mask_vocabthres(corpus, table, n);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      for (std::size_t j = 0; j < corpus[i].tokens.size(); ++j) {
        if (is_mask(previous[i].tokens()[j])) EXPECT_TRUE(is_mask(current[i].tokens()[j]));
      }
    }
    previous = current;
  }
}

TEST(MaskingProperties, SurvivorsBelongToPolicySet) {
  const auto corpus = random_corpus(200, 12);
  const VocabThresPolicy keep(build_frequency_table(corpus), 8);
  for (const auto& s : mask_vocabthres(corpus, keep))
    for (const auto& t : s.tokens())
      if (!is_mask(t)) EXPECT_TRUE(keep.keeps(t));

  const AllowListPolicy allow({"t0", "t1"});
  for (const auto& s : mask_allowlist(corpus, allow))
    for (const auto& t : s.tokens())
      if (!is_mask(t)) EXPECT_TRUE(allow.keeps(t));
}

TEST(MaskingProperties, Idempotent) {
  const auto corpus = random_corpus(150, 13);
  const auto again = [](const MaskedCorpus& m) { return m.to_corpus(); };
  const AllowListPolicy allow({"t0", "t1", "t4"});
  const VocabThresPolicy keep(build_frequency_table(corpus), 6);
  const auto tagger = std::make_shared<GazetteerTagger>(std::vector<Token>{"t9"}, true);
  for (const MaskPolicy& p : {MaskPolicy(allow), MaskPolicy(keep), MaskPolicy(EntityTaggerPolicy{tagger})}) {
    const auto once = mask_corpus(corpus, p);
    const auto twice = mask_corpus(again(once), p);
    EXPECT_EQ(lines_of(once), lines_of(twice)) << technique_name(technique_of(p));
  }
}

TEST(MaskingProperties, ParallelEqualsSerial) {
  const auto corpus = random_corpus(500, 14);
  const VocabThresPolicy keep(build_frequency_table(corpus), 10);
  EXPECT_EQ(mask_vocabthres(corpus, keep, 1), mask_vocabthres(corpus, keep, 8));
}

TEST(MaskingPolicies, ForbiddenSets) {
  const AllowListPolicy allow({"a", "b"});
  EXPECT_EQ(forbidden_tokens(allow), std::optional<TokenSet>(TokenSet{"a", "b"}));
  const VocabThresPolicy keep(FrequencyTable({{"x", 2}, {"y", 1}}), 1);
  EXPECT_EQ(forbidden_tokens(keep), std::optional<TokenSet>(TokenSet{"x"}));
  EXPECT_FALSE(forbidden_tokens(EntityTaggerPolicy{std::make_shared<AllFalseTagger>()}));
}

TEST(MaskingPolicies, TechniqueNames) {
  for (auto t : {MaskTechnique::kAllowList, MaskTechnique::kVocabThres, MaskTechnique::kEntityTagger}) {
    EXPECT_EQ(parse_technique(technique_name(t)), t);
  }
  EXPECT_FALSE(parse_technique("bogus"));
}

TEST(MaskedSentenceTest, RunsCoverMarkers) {
  const auto s = maskfill::testing::ms("[MASK] a [MASK] [MASK] b [MASK]");
  EXPECT_EQ(s.mask_runs(), (std::vector<MaskRun>{{0, 1}, {2, 2}, {5, 1}}));
  EXPECT_EQ(s.mask_count(), 4u);
  EXPECT_EQ(s.original_len(), 6u);
}
