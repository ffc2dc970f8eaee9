#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "afrisynth/error.hpp"
#include "afrisynth/minhash.hpp"
#include "test_support.hpp"

using namespace afrisynth;
using testing_support::exact_jaccard;
using testing_support::random_words;
using testing_support::replace_tail;

namespace {

ShingleSet numbered(std::size_t from, std::size_t to) {
    ShingleSet s;
    for (auto i = from; i < to; ++i) s.insert("s" + std::to_string(i));
    return s;
}

}  // namespace

TEST(Shingles, DocumentedExamples) {
    EXPECT_EQ(shingles("A b C d", 3), (ShingleSet{"a b c", "b c d"}));
    EXPECT_EQ(shingles("hi there", 3), (ShingleSet{"hi there"}));
    EXPECT_EQ(shingles("The  Quick\tbrown Fox", 3), shingles("the quick brown   fox", 3));
}

TEST(Shingles, EmptyTextThrows) {
    try {
        shingles("  \n ", 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyText);
    }
    EXPECT_THROW(shingles("x", 0), std::invalid_argument);
}

TEST(MinHash, EqualSetsEqualSignatures) {
    auto a = minhash(numbered(0, 50), 256, 9);
    EXPECT_EQ(a, minhash(numbered(0, 50), 256, 9));
    EXPECT_EQ(a.num_perms(), 256u);
    EXPECT_NE(a, minhash(numbered(0, 50), 256, 10));
}

TEST(MinHash, EmptySetThrows) {
    try {
        minhash({}, 16, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptySet);
    }
}

TEST(MinHash, EstimateReflexiveSymmetric) {
    auto a = minhash(numbered(0, 80), 256, 3);
    auto b = minhash(numbered(40, 120), 256, 3);
    EXPECT_DOUBLE_EQ(estimate_jaccard(a, a), 1.0);
    EXPECT_DOUBLE_EQ(estimate_jaccard(a, b), estimate_jaccard(b, a));
}

TEST(MinHash, IncompatibleSignatures) {
    auto a = minhash(numbered(0, 10), 128, 1);
    auto b = minhash(numbered(0, 10), 256, 1);
    auto c = minhash(numbered(0, 10), 128, 2);
    for (const auto* other : {&b, &c}) {
        try {
            estimate_jaccard(a, *other);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::IncompatibleSignatures);
        }
    }
}

TEST(MinHash, DisjointSetsEstimateNearZero) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto a = minhash(numbered(0, 100), 256, seed);
        auto b = minhash(numbered(1000, 1100), 256, seed);
        EXPECT_LE(estimate_jaccard(a, b), 0.05);
    }
}

TEST(MinHash, EstimateTracksExactJaccard) {
    std::mt19937_64 rng(11);
    int within = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const std::size_t overlap = rng() % 101;
        ShingleSet a = numbered(0, 100);
        ShingleSet b = numbered(100 - overlap, 200 - overlap);
        const double truth = exact_jaccard(a, b);
        const double est = estimate_jaccard(minhash(a, 256, t), minhash(b, 256, t));
        within += std::fabs(est - truth) <= 0.08;
    }
    EXPECT_GE(within, 95);
}

TEST(Lsh, GeometryAndThreshold) {
    LshIndex idx(32, 8);
    EXPECT_EQ(idx.num_perms(), 256u);
    EXPECT_NEAR(idx.threshold(), std::pow(1.0 / 32, 1.0 / 8), 1e-12);
    EXPECT_NEAR(idx.threshold(), 0.648, 0.001);
    EXPECT_THROW(LshIndex(0, 8), std::invalid_argument);
}

TEST(Lsh, InsertQueryIdempotent) {
    LshIndex idx(32, 8);
    auto sig = minhash(numbered(0, 30), 256, 1);
    EXPECT_TRUE(idx.candidates(sig).empty());
    idx.insert("x", sig);
    idx.insert("x", sig);
    EXPECT_EQ(idx.size(), 1u);
    EXPECT_EQ(idx.candidates(sig), std::vector<std::string>{"x"});
}

TEST(Lsh, RejectsMismatchedSignature) {
    LshIndex idx(32, 8);
    idx.insert("x", minhash(numbered(0, 30), 256, 1));
    for (const auto& bad : {minhash(numbered(0, 30), 128, 1), minhash(numbered(0, 30), 256, 2)}) {
        try {
            idx.insert("y", bad);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::IncompatibleSignatures);
        }
    }
}

TEST(Lsh, PlantedPairAtNinetyPercentCollides) {
    std::mt19937_64 rng(5);
    int hits = 0;
    for (int t = 0; t < 100; ++t) {
        // 100 words -> 98 shingles; swapping 5 gives 93 / 103
        const auto base = random_words(rng, 100);
        const auto twin = replace_tail(base, 5, rng);
        const auto sa = shingles(base, 3), sb = shingles(twin, 3);
        ASSERT_NEAR(exact_jaccard(sa, sb), 93.0 / 103.0, 1e-12);
        LshIndex idx(32, 8);
        for (int noise = 0; noise < 20; ++noise) {
            idx.insert("n" + std::to_string(noise), minhash(shingles(random_words(rng, 100), 3), 256, t));
        }
        const auto ma = minhash(sa, 256, t), mb = minhash(sb, 256, t);
        idx.insert("a", ma);
        idx.insert("b", mb);
        const auto ca = idx.candidates(ma), cb = idx.candidates(mb);
        hits += std::find(ca.begin(), ca.end(), "b") != ca.end() && std::find(cb.begin(), cb.end(), "a") != cb.end();
    }
    EXPECT_GE(hits, 95);
}

TEST(Dedup, IdenticalTextsSecondDropped) {
    std::vector<TextItem> items{{"a", "one two three four"}, {"b", "one two three four"}};
    auto r = dedup(items, DedupParams{});
    EXPECT_EQ(r.kept_ids, std::vector<std::string>{"a"});
    ASSERT_EQ(r.dropped.size(), 1u);
    EXPECT_EQ(r.dropped[0].dropped_id, "b");
    EXPECT_EQ(r.dropped[0].kept_id, "a");
    EXPECT_DOUBLE_EQ(r.dropped[0].estimate, 1.0);
}

TEST(Dedup, SingleItemKept) {
    std::vector<TextItem> items{{"a", "alone"}};
    auto r = dedup(items, DedupParams{});
    EXPECT_EQ(r.kept_ids, std::vector<std::string>{"a"});
    EXPECT_TRUE(r.dropped.empty());
}

TEST(Dedup, DistinctCorpusKeepsEverything) {
    std::mt19937_64 rng(99);
    std::vector<TextItem> items;
    for (int i = 0; i < 200; ++i) items.push_back({"d" + std::to_string(i), random_words(rng, 30)});
    // oracle: confirm pairwise dissimilarity first
    std::vector<ShingleSet> sets;
    for (const auto& it : items) sets.push_back(shingles(it.text, 3));
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) ASSERT_LT(exact_jaccard(sets[i], sets[j]), 0.3);
    }
    EXPECT_EQ(dedup(items, DedupParams{}).kept_ids.size(), items.size());
}

TEST(Dedup, WitnessesAreAuditableAndFixpoint) {
    std::mt19937_64 rng(4);
    std::vector<TextItem> items;
    for (int i = 0; i < 60; ++i) {
        const auto base = random_words(rng, 40);
        items.push_back({"o" + std::to_string(i), base});
        if (i % 3 == 0) items.push_back({"c" + std::to_string(i), replace_tail(base, 1, rng)});
    }
    DedupParams params;
    auto r = dedup(items, params);
    std::set<std::string> kept(r.kept_ids.begin(), r.kept_ids.end());
    for (const auto& d : r.dropped) {
        EXPECT_TRUE(kept.contains(d.kept_id));
        EXPECT_GE(d.estimate, params.threshold);
    }
    EXPECT_EQ(r.dropped.size(), 20u);
    std::vector<TextItem> survivors;
    for (const auto& it : items) {
        if (kept.contains(it.id)) survivors.push_back(it);
    }
    EXPECT_EQ(dedup(survivors, params).kept_ids, r.kept_ids);
}

TEST(Dedup, ParamsValidation) {
    DedupParams p;
    p.bands = 16;
    EXPECT_THROW(p.validate(), Error);
    p = DedupParams{};
    p.threshold = 1.5;
    EXPECT_THROW(p.validate(), Error);
    auto q = DedupParams::from_json({{"shingle_size", 2}, {"threshold", 0.7}, {"bands", 16}, {"rows", 16}});
    EXPECT_EQ(q.shingle_size, 2u);
    EXPECT_EQ(q.num_perms, 256u);
}

TEST(Decontaminate, ExactCopyRemovedAndDisjointKept) {
    std::vector<std::string> eval{"Jason had 20 lollipops. He gave Denny some lollipops. Now Jason has 12 lollipops."};
    std::vector<TextItem> train{{"t1", eval[0]}, {"t2", "completely unrelated words about farming goats today"}};
    const auto eval_before = eval;
    auto r = decontaminate(train, eval, DedupParams{});
    EXPECT_EQ(r.kept_ids, std::vector<std::string>{"t2"});
    ASSERT_EQ(r.removed.size(), 1u);
    EXPECT_EQ(r.removed[0].kept_id, "eval:0");
    EXPECT_EQ(eval, eval_before);
}

TEST(Decontaminate, EmptyEvalRejected) {
    std::vector<TextItem> train{{"t", "x"}};
    EXPECT_THROW(decontaminate(train, {}, DedupParams{}), std::invalid_argument);
}
