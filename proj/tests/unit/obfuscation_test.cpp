#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "helpers.hpp"
#include "maskfill/obfuscation.hpp"
#include "maskfill/stat_filler.hpp"
#include "maskfill/synthetic.hpp"
#include "stub_filler.hpp"

using namespace maskfill;
using maskfill::testing::joined;
using maskfill::testing::ms;
using maskfill::testing::StubFiller;
using maskfill::testing::TunableStub;

namespace {

/// Answers "f<number of left tokens>" then "g..." so fills reveal their context.
std::vector<FillCandidate> context_echo(const maskfill::testing::FillQuery& q) {
  std::vector<FillCandidate> out{{"f" + std::to_string(q.left.size()), 0.9},
                                 {"g" + std::to_string(q.left.size()), 0.5},
                                 {"h" + std::to_string(q.left.size()), 0.1}};
  if (out.size() > q.k) out.resize(q.k);
  return out;
}

MaskedCorpus random_masked(std::size_t n, unsigned seed, double rate) {
  std::mt19937 gen(seed);
  std::bernoulli_distribution mask(rate);
  std::vector<MaskedSentence> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Token> tokens;
    const auto len = 1 + gen() % 10;
    for (std::size_t j = 0; j < len; ++j) {
      tokens.push_back(mask(gen) ? std::string(kMaskToken) : "w" + std::to_string(gen() % 30));
    }
    out.emplace_back(std::move(tokens), i);
  }
  return MaskedCorpus(std::move(out));
}

std::shared_ptr<const StatFiller> small_filler() {
  const TrigramSource source(3, SyntheticParams{.vocab_size = 30});
  return StatFiller::train(source.sample(400, 1));
}

std::vector<Token> non_masks(const std::vector<Token>& tokens) {
  std::vector<Token> out;
  for (const auto& t : tokens)
    if (!is_mask(t)) out.push_back(t);
  return out;
}

}  // namespace

TEST(Merge, CollapsesRuns) {
  EXPECT_EQ(merge_consecutive_masks(ms("a [MASK] [MASK] b")).text(), "a [MASK] b");
  EXPECT_EQ(merge_consecutive_masks(ms("a b")).text(), "a b");
  EXPECT_EQ(merge_consecutive_masks(ms("[MASK] [MASK] [MASK]")).text(), "[MASK]");
}

TEST(Merge, KeepsOriginalLength) {
  const auto m = merge_consecutive_masks(ms("a [MASK] [MASK] b", 3));
  EXPECT_EQ(m.original_len(), 4u);
  EXPECT_EQ(m.index(), 3u);
}

TEST(Merge, IdempotentAndNonIncreasingOnRandomPatterns) {
  for (const auto& s : random_masked(500, 21, 0.4)) {
    const auto once = merge_consecutive_masks(s);
    EXPECT_EQ(merge_consecutive_masks(once).tokens(), once.tokens());
    EXPECT_LE(once.size(), s.size());
    EXPECT_EQ(non_masks(once.tokens()), non_masks(s.tokens()));
    for (const auto& run : once.mask_runs()) EXPECT_EQ(run.length, 1u);
  }
}

TEST(FillTop1, NoMasksIsIdentity) {
  const auto stub = std::make_shared<StubFiller>(context_echo);
  EXPECT_EQ(joined(fill_top1(ms("a b c"), *stub)), "a b c");
  EXPECT_TRUE(stub->queries().empty());
}

TEST(FillTop1, LeftToRightWithFilledContext) {
  const auto stub = std::make_shared<StubFiller>(context_echo);
  const auto out = fill_top1(ms("[MASK] lives in [MASK]"), *stub);
  EXPECT_EQ(joined(out), "f0 lives in f3");
  const auto q = stub->queries();
  ASSERT_EQ(q.size(), 2u);
  EXPECT_TRUE(q[0].left.empty());
  EXPECT_EQ(q[0].right, (std::vector<Token>{"lives", "in", "[MASK]"}));
  EXPECT_EQ(q[1].left, (std::vector<Token>{"f0", "lives", "in"}));
  EXPECT_TRUE(q[1].right.empty());
  EXPECT_EQ(q[0].k, 1u);
}

TEST(FillTop1, SingleMaskSentence) {
  const auto stub = std::make_shared<StubFiller>(context_echo);
  EXPECT_EQ(joined(fill_top1(ms("[MASK]"), *stub)), "f0");
}

TEST(FillTop1, EmptyCandidatesRaiseFillError) {
  const StubFiller empty([](const auto&) { return std::vector<FillCandidate>{}; });
  try {
    fill_top1(ms("a b [MASK]", 4), empty);
    FAIL();
  } catch (const FillError& e) {
    EXPECT_EQ(e.sentence_index(), 4u);
    EXPECT_EQ(e.mask_position(), 2u);
  }
}

TEST(FillTop1, MarkerCandidatesAreSkipped) {
  const StubFiller stub([](const auto&) {
    return std::vector<FillCandidate>{{"[MASK]", 0.9}, {"ok", 0.1}};
  });
  EXPECT_EQ(joined(fill_top1(ms("[MASK]"), stub)), "ok");
}

TEST(FillTopK, KOneEqualsTop1OnRandomSentences) {
  const auto filler = small_filler();
  const RandomSource rng(99);
  for (const auto& s : random_masked(200, 5, 0.3)) {
    const auto merged = merge_consecutive_masks(s);
    EXPECT_EQ(fill_topk(merged, *filler, TopK{.k = 1}, rng), fill_top1(merged, *filler));
  }
}

TEST(FillTopK, QueriesWithK) {
  const auto stub = std::make_shared<StubFiller>(context_echo);
  fill_topk(ms("a [MASK]"), *stub, TopK{.k = 3}, RandomSource(1));
  EXPECT_EQ(stub->queries().at(0).k, 3u);
  EXPECT_THROW(fill_topk(ms("a [MASK]"), *stub, TopK{.k = 0}, RandomSource(1)),
               std::invalid_argument);
}

TEST(DrawCandidate, ForbiddenSoundnessByEnumeration) {
  const std::vector<FillCandidate> ranked{{"x", 0.5}, {"y", 0.3}, {"z", 0.2}};
  const std::vector<Token> names{"x", "y", "z"};
  // For uniform draws without replacement the pick is the first allowed
  // token of a uniformly random permutation; enumerate all six.
  for (unsigned mask = 0; mask < 8; ++mask) {
    TokenSet forbidden;
    for (unsigned b = 0; b < 3; ++b)
      if (mask & (1u << b)) forbidden.insert(names[b]);

    std::set<Token> expected;
    std::vector<int> perm{0, 1, 2};
    do {
      Token pick = "x";
      for (int i : perm) {
        if (!forbidden.contains(names[i])) {
          pick = names[i];
          break;
        }
      }
      expected.insert(pick);
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::set<Token> seen;
    const TopK params{.k = 3, .forbidden = forbidden};
    for (std::uint64_t seed = 0; seed < 600; ++seed) {
      Rng rng(seed);
      const auto& pick = draw_candidate(ranked, params, rng);
      seen.insert(pick.token);
      if (forbidden.contains(pick.token)) EXPECT_EQ(forbidden.size(), 3u);
    }
    EXPECT_EQ(seen, expected) << "forbidden mask " << mask;
  }
}

TEST(DrawCandidate, ForbiddenAndExhaustedFixtures) {
  const std::vector<FillCandidate> ranked{{"x", 0.5}, {"y", 0.3}, {"z", 0.2}};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng a(seed), b(seed);
    EXPECT_EQ(draw_candidate(ranked, TopK{.k = 3, .forbidden = TokenSet{"x", "y"}}, a).token, "z");
    EXPECT_EQ(draw_candidate(ranked, TopK{.k = 3, .forbidden = TokenSet{"x", "y", "z"}}, b).token,
              "x");
  }
}

TEST(DrawCandidate, UniformOverTopK) {
  const std::vector<FillCandidate> ranked{{"x", 0.9}, {"y", 0.05}, {"z", 0.05}};
  std::map<Token, int> hist;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    Rng r(seed);
    ++hist[draw_candidate(ranked, TopK{.k = 3}, r).token];
  }
  for (auto& [t, n] : hist) EXPECT_NEAR(n, 1000, 120) << t;
  // k limits the pool
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r(seed);
    EXPECT_NE(draw_candidate(ranked, TopK{.k = 2}, r).token, "z");
  }
}

TEST(DrawCandidate, WeightedFollowsScores) {
  const std::vector<FillCandidate> ranked{{"x", 0.9}, {"y", 0.1}};
  int x = 0;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    Rng r(seed);
    x += draw_candidate(ranked, TopK{.k = 2, .weighted = true}, r).token == "x";
  }
  EXPECT_NEAR(x, 3600, 150);
}

TEST(Obfuscate, ZeroMasksIsIdentity) {
  const MaskedCorpus m({ms("a b", 0), ms("c", 1)});
  const auto stub = std::make_shared<StubFiller>(context_echo);
  for (const FillStrategy& s : {FillStrategy(Top1{}), FillStrategy(TopK{})}) {
    EXPECT_TRUE(obfuscate_corpus(m, s, stub, RandomSource(1)).same_tokens(m.to_corpus()));
  }
}

TEST(Obfuscate, HandTracedTwoSentences) {
  const MaskedCorpus m({ms("[MASK] [MASK] b [MASK]", 0), ms("x [MASK]", 1)});
  const auto stub = std::make_shared<StubFiller>(context_echo);
  const auto out = obfuscate_corpus(m, Top1{}, stub, RandomSource(0));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(joined(out[0]), "f0 b f2");
  EXPECT_EQ(joined(out[1]), "x f1");
}

TEST(Obfuscate, AggregatesFailuresInSentenceOrder) {
  const MaskedCorpus m({ms("bad [MASK]", 0), ms("ok [MASK]", 1), ms("a bad [MASK]", 2)});
  const auto stub = std::make_shared<StubFiller>([](const maskfill::testing::FillQuery& q) {
    if (std::find(q.left.begin(), q.left.end(), "bad") != q.left.end()) {
      return std::vector<FillCandidate>{};
    }
    return std::vector<FillCandidate>{{"fine", 1.0}};
  });
  try {
    obfuscate_corpus(m, Top1{}, stub, RandomSource(0), {.threads = 3});
    FAIL();
  } catch (const ObfuscationError& e) {
    ASSERT_EQ(e.failures().size(), 2u);
    EXPECT_EQ(e.failures()[0].sentence_index, 0u);
    EXPECT_EQ(e.failures()[0].mask_position, 1u);
    EXPECT_EQ(e.failures()[1].sentence_index, 2u);
    EXPECT_EQ(e.failures()[1].mask_position, 2u);
  }
}

TEST(Obfuscate, NoMarkerSurvivesAndContextPreserved) {
  const auto filler = small_filler();
  const auto masked = random_masked(300, 8, 0.35);
  for (const FillStrategy& s :
       {FillStrategy(Top1{}), FillStrategy(TopK{.k = 5}), FillStrategy(FineTune{.rounds = 2})}) {
    const auto out = obfuscate_corpus(masked, s, filler, RandomSource(4));
    ASSERT_EQ(out.size(), masked.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto merged = merge_consecutive_masks(masked[i]);
      ASSERT_EQ(out[i].tokens.size(), merged.size());
      for (std::size_t j = 0; j < merged.size(); ++j) {
        EXPECT_FALSE(is_mask(out[i].tokens[j]));
        if (!is_mask(merged.tokens()[j])) EXPECT_EQ(out[i].tokens[j], merged.tokens()[j]);
      }
    }
  }
}

TEST(Obfuscate, SeedDeterministicUnderParallelism) {
  const auto filler = small_filler();
  const auto masked = random_masked(400, 9, 0.3);
  const FillStrategy s = TopK{.k = 10};
  const auto serial = obfuscate_corpus(masked, s, filler, RandomSource(17), {.threads = 1});
  const auto again = obfuscate_corpus(masked, s, filler, RandomSource(17), {.threads = 1});
  const auto parallel = obfuscate_corpus(masked, s, filler, RandomSource(17), {.threads = 8});
  EXPECT_EQ(format_corpus(serial), format_corpus(again));
  EXPECT_EQ(format_corpus(serial), format_corpus(parallel));
  EXPECT_NE(format_corpus(serial),
            format_corpus(obfuscate_corpus(masked, s, filler, RandomSource(18))));
}

TEST(Obfuscate, TopKRespectsForbiddenUnlessExhausted) {
  const auto filler = small_filler();
  const auto masked = random_masked(200, 10, 0.3);
  const TokenSet forbidden{"w0", "w1", "w2", "w3"};
  const TopK params{.k = 5, .forbidden = forbidden};
  for (const auto& s : masked) {
    const auto merged = merge_consecutive_masks(s);
    const auto out = fill_topk(merged, *filler, params, RandomSource(3));
    std::vector<Token> prefix;
    for (std::size_t j = 0; j < merged.size(); ++j) {
      if (is_mask(merged.tokens()[j]) && forbidden.contains(out.tokens[j])) {
        const std::span<const Token> right(merged.tokens().data() + j + 1, merged.size() - j - 1);
        for (const auto& c : filler->candidates(prefix, right, 5)) EXPECT_TRUE(forbidden.contains(c.token));
      }
      prefix.push_back(out.tokens[j]);
    }
  }
}

TEST(FinetuneLoop, IdentityFinetuneEqualsPlainFill) {
  const auto masked = random_masked(50, 2, 0.3);
  const auto tunable = std::make_shared<TunableStub>(context_echo);
  const RandomSource rng(5);
  const auto result = finetune_loop(masked, tunable, TopK{.k = 3}, 1, rng);
  EXPECT_TRUE(result.corpus.same_tokens(obfuscate_corpus(masked, TopK{.k = 3}, tunable, rng)));
  EXPECT_EQ(result.filler->version(), "tunable-1");
  EXPECT_EQ(tunable->tuned_on().size(), 1u);
}

TEST(FinetuneLoop, SecondRoundChangesBuiltinFill) {
  const auto filler = small_filler();
  const auto masked = random_masked(300, 3, 0.3);
  const RandomSource rng(6);
  const auto one = finetune_loop(masked, filler, TopK{.k = 10}, 1, rng);
  const auto two = finetune_loop(masked, filler, TopK{.k = 10}, 2, rng);
  EXPECT_EQ(two.filler->version(), "stat-2");
  EXPECT_FALSE(one.corpus.same_tokens(two.corpus));
}

TEST(FinetuneLoop, CleanFirstThresholdTau) {
  // three of four sentences are mask-free
  const MaskedCorpus masked({ms("a b", 0), ms("c d", 1), ms("e f", 2), ms("g [MASK]", 3)});
  const auto tunable = std::make_shared<TunableStub>(context_echo);
  const auto clean = finetune_loop(masked, tunable, Top1{}, 1, RandomSource(1), 0.5);
  EXPECT_TRUE(clean.tuned_on_clean_first);
  ASSERT_EQ(tunable->tuned_on().size(), 1u);
  EXPECT_EQ(tunable->tuned_on()[0].size(), 3u);

  const auto full = std::make_shared<TunableStub>(context_echo);
  const auto forced = finetune_loop(masked, full, Top1{}, 1, RandomSource(1), 1.0);
  EXPECT_FALSE(forced.tuned_on_clean_first);
  ASSERT_EQ(full->tuned_on().size(), 1u);
  EXPECT_EQ(full->tuned_on()[0].size(), 4u);
  EXPECT_EQ(joined(full->tuned_on()[0][3]), "g f1");
}

TEST(FinetuneLoop, FailureCarriesRound) {
  class Breaks : public MaskFiller {
   public:
    explicit Breaks(int left) : left_(left) {}
    std::vector<FillCandidate> candidates(std::span<const Token>, std::span<const Token>,
                                          std::size_t) const override {
      return {{"t", 1.0}};
    }
    bool supports_finetune() const override { return true; }
    FillerPtr finetune(const Corpus&) const override {
      if (left_ == 0) throw std::runtime_error("tuning crashed");
      return std::make_shared<Breaks>(left_ - 1);
    }
    std::string version() const override { return std::to_string(left_); }

   private:
    int left_;
  };
  const MaskedCorpus masked({ms("[MASK] a", 0)});
  try {
    finetune_loop(masked, std::make_shared<Breaks>(1), Top1{}, 3, RandomSource(0));
    FAIL();
  } catch (const FinetuneError& e) {
    EXPECT_EQ(e.round(), 2u);
  }
}

TEST(FinetuneLoop, RequiresTunableFiller) {
  const MaskedCorpus masked({ms("[MASK] a", 0)});
  EXPECT_THROW(finetune_loop(masked, std::make_shared<StubFiller>(context_echo), Top1{}, 1,
                             RandomSource(0)),
               std::invalid_argument);
}

TEST(StrategyNames, All) {
  EXPECT_EQ(strategy_name(Top1{}), "top1");
  EXPECT_EQ(strategy_name(TopK{}), "topk");
  EXPECT_EQ(strategy_name(FineTune{}), "topk_ft");
  EXPECT_EQ(strategy_name(FineTune{.inner = Top1{}}), "top1_ft");
}
