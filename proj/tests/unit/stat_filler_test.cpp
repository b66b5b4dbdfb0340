#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

#include "helpers.hpp"
#include "maskfill/stat_filler.hpp"
#include "maskfill/synthetic.hpp"
#include "reference_lm.hpp"
#include "temp_dir.hpp"

using namespace maskfill;
using maskfill::testing::lines_of;
using maskfill::testing::ReferenceLm;
using maskfill::testing::RefMode;

namespace {

using Ranked = std::vector<std::pair<std::string, double>>;

/// Scores the whole pool with the reference model and sorts by the ranking rule.
Ranked reference_ranking(const ReferenceLm& ref, const std::vector<std::string>& pool,
                         const std::vector<std::string>& left, const std::vector<std::string>& right) {
  const std::string l1 = left.size() >= 1 ? left[left.size() - 1] : "<s>";
  const std::string l2 = left.size() >= 2 ? left[left.size() - 2] : "<s>";
  const std::string r1 = right.empty() ? "</s>" : right.front();
  Ranked out;
  for (const auto& w : pool) out.emplace_back(w, ref.prob(w, l2, l1) * ref.prob(r1, l1, w));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

std::size_t rank_of(const std::vector<FillCandidate>& list, const std::string& token) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (list[i].token == token) return i;
  return list.size();
}

}  // namespace

TEST(StatFillerTest, PoolFromVocabulary) {
  const auto f = StatFiller::train(Corpus::from_lines({"a b"}));
  EXPECT_EQ(f->pool(), (std::vector<Token>{"a", "b"}));
  EXPECT_EQ(f->version(), "stat-0");
}

TEST(StatFillerTest, TrainingIsDeterministic) {
  const auto c = Corpus::from_lines({"a b c", "c a", "b b a"});
  EXPECT_EQ(StatFiller::train(c)->snapshot(), StatFiller::train(c)->snapshot());
}

TEST(StatFillerTest, PoolExcludesMarkerAndTechnicalSymbols) {
  const auto lm = train_lm(parse_corpus("a [MASK] b <unk>\n", CorpusKind::kMasked),
                           TrainingMode::kBaseline0);
  ASSERT_TRUE(lm.in_vocabulary("[MASK]"));
  const StatFiller f(lm, 1.0);
  EXPECT_EQ(f.pool(), (std::vector<Token>{"a", "b"}));
  for (const auto& c : f.candidates({}, {}, 10)) EXPECT_FALSE(is_mask(c.token));
}

TEST(StatFillerTest, BidirectionalScoreExample) {
  const auto bg = Corpus::from_lines({"a b c", "a b d"});
  const auto f = StatFiller::train(bg);
  const ReferenceLm ref(lines_of(bg), RefMode::kOracle);
  const std::vector<Token> left{"a"}, right{"c"};
  const auto got = f->candidates(left, right, 10);
  ASSERT_FALSE(got.empty());
  EXPECT_EQ(got.front().token, "b");
  EXPECT_NEAR(got.front().score, ref.prob("b", "<s>", "a") * ref.prob("c", "a", "b"), 1e-15);
  EXPECT_DOUBLE_EQ(f->score("b", left, right), got.front().score);
}

TEST(StatFillerTest, LargeKReturnsWholePoolSorted) {
  const auto f = StatFiller::train(Corpus::from_lines({"a b c", "a b d"}));
  const auto got = f->candidates(std::vector<Token>{"a"}, std::vector<Token>{"c"}, 100);
  EXPECT_EQ(got.size(), f->pool().size());
  EXPECT_TRUE(is_ranked(got));
  EXPECT_TRUE(f->candidates({}, {}, 0).empty());
}

TEST(StatFillerTest, EmptyContextPadding) {
  const auto bg = Corpus::from_lines({"a b c", "a b d", "d"});
  const auto f = StatFiller::train(bg);
  const ReferenceLm ref(lines_of(bg), RefMode::kOracle);
  for (const auto& c : f->candidates({}, {}, 10)) {
    EXPECT_NEAR(c.score, ref.prob(c.token, "<s>", "<s>") * ref.prob("</s>", "<s>", c.token), 1e-15)
        << c.token;
  }
}

TEST(StatFillerTest, BruteForceEquivalenceOnRandomInstances) {
  std::mt19937 gen(17);
  for (int instance = 0; instance < 6; ++instance) {
    const TrigramSource source(instance, SyntheticParams{.vocab_size = 25});
    const auto bg = source.sample(150, instance + 100);
    const auto f = StatFiller::train(bg);
    const ReferenceLm ref(lines_of(bg), RefMode::kOracle);
    for (int q = 0; q < 40; ++q) {
      std::vector<Token> left, right;
      for (auto n = gen() % 4; n > 0; --n) left.push_back("w" + std::string(gen() % 2 ? "00" : "01") + std::to_string(gen() % 10));
      for (auto n = gen() % 3; n > 0; --n) right.push_back("w00" + std::to_string(gen() % 10));
      if (gen() % 5 == 0) right.insert(right.begin(), "unseen");
      const std::size_t k = 1 + gen() % 12;
      const auto got = f->candidates(left, right, k);
      const auto want = reference_ranking(ref, f->pool(), left, right);
      ASSERT_EQ(got.size(), std::min(k, want.size()));
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].token, want[i].first) << "instance " << instance << " query " << q;
        EXPECT_NEAR(got[i].score, want[i].second, 1e-12 * want[i].second);
        EXPECT_GT(got[i].score, 0.0);
      }
    }
  }
}

TEST(StatFillerTest, MuZeroKeepsRankings) {
  const auto bg = Corpus::from_lines({"a b c", "a b d", "a z d"});
  const auto f = StatFiller::train(bg, {.mu = 0.0});
  const auto tuned = f->finetuned(Corpus::from_lines({"a z c", "a z c"}));
  EXPECT_EQ(tuned->version_number(), 1u);
  const std::vector<Token> left{"a"}, right{"c"};
  EXPECT_EQ(tuned->candidates(left, right, 10), f->candidates(left, right, 10));
}

TEST(StatFillerTest, FinetuneNeverLowersRankOfTunedToken) {
  const auto bg = Corpus::from_lines({"a b c", "a b d", "a z d", "b c d"});
  const auto f = StatFiller::train(bg);
  const std::vector<Token> left{"a"}, right{"c"};
  std::size_t before = rank_of(f->candidates(left, right, 10), "z");
  auto current = f;
  for (int round = 0; round < 3; ++round) {
    current = current->finetuned(Corpus::from_lines({"a z c", "a z c", "a z c"}));
    const auto after = rank_of(current->candidates(left, right, 10), "z");
    EXPECT_LE(after, before);
    before = after;
  }
  EXPECT_EQ(before, 0u);
}

TEST(StatFillerTest, FinetuneAddsWeightedCounts) {
  const auto f = StatFiller::train(Corpus::from_lines({"a b"}), {.mu = 2.0});
  const auto tuned = f->finetuned(Corpus::from_lines({"a c"}));
  EXPECT_EQ(tuned->lm().counts().unigrams.at("a"), 3.0);
  EXPECT_EQ(tuned->lm().counts().unigrams.at("c"), 2.0);
  EXPECT_EQ(tuned->lm().counts().trigrams.at({"<s>", "a", "c"}), 2.0);
  EXPECT_EQ(tuned->pool(), (std::vector<Token>{"a", "b", "c"}));
  // the original is untouched
  EXPECT_EQ(f->lm().counts().unigrams.at("a"), 1.0);
  EXPECT_EQ(f->version_number(), 0u);
}

TEST(StatFillerTest, VersionIncrementsByOne) {
  auto f = StatFiller::train(Corpus::from_lines({"a b"}));
  for (std::uint64_t v = 1; v <= 3; ++v) {
    f = f->finetuned(Corpus::from_lines({"b a"}));
    EXPECT_EQ(f->version_number(), v);
    EXPECT_EQ(f->version(), "stat-" + std::to_string(v));
  }
  EXPECT_THROW(f->finetuned(Corpus{}), LmError);
  EXPECT_THROW(StatFiller::train(Corpus{}), LmError);
}

TEST(StatFillerTest, SnapshotRoundTrip) {
  const auto f = StatFiller::train(Corpus::from_lines({"a b"}), {.mu = 0.5})->finetuned(
      Corpus::from_lines({"b c"}));
  const auto snap = f->snapshot();
  EXPECT_EQ(snap.rfind("maskfill-stat-filler 1\nversion 1\nmu 0.5\nmaskfill-trigram-lm 1\n", 0), 0u);
  const auto back = StatFiller::from_snapshot(snap);
  EXPECT_EQ(back->snapshot(), snap);
  EXPECT_EQ(back->version(), "stat-1");

  maskfill::testing::TempDir dir;
  f->save(dir / "f.txt");
  EXPECT_EQ(StatFiller::load(dir / "f.txt")->candidates({}, {}, 5), f->candidates({}, {}, 5));
  EXPECT_THROW(StatFiller::from_snapshot("maskfill-stat-filler 1\nversion x\n"), LmError);
}

TEST(StatFillerTest, ConcurrentQueriesAgree) {
  const TrigramSource source(2, SyntheticParams{.vocab_size = 50});
  const auto f = StatFiller::train(source.sample(300, 3));
  const std::vector<Token> left{"w001"}, right{"w002"};
  const auto expected = f->candidates(left, right, 10);
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) mismatches += f->candidates(left, right, 10) != expected;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(mismatches.load(), 0);
}
