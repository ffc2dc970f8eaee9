#include <gtest/gtest.h>

#include <set>

#include "afrisynth/error.hpp"
#include "afrisynth/translate.hpp"
#include "test_support.hpp"

using namespace afrisynth;
using testing_support::MockRig;
using testing_support::TempDir;
using testing_support::write_text;

namespace {

const SourcePair kLollipops{"gsm-1",
                            "Jason had 20 lollipops. He gave Denny some lollipops. Now Jason has 12 lollipops. "
                            "How many lollipops did Jason give to Denny?",
                            "Jason started with 20 lollipops and now has 12, so he gave 20 - 12 = 8.\n8",
                            SourceDataset::Bigmath};

std::vector<SourcePair> make_pairs(int n) {
    std::vector<SourcePair> out;
    for (int i = 0; i < n; ++i) {
        const auto k = std::to_string(i);
        out.push_back({"p" + k, "Ada has " + k + " mangoes and buys 3 more.", "She has " + k + " + 3.\n" + k,
                       i % 2 ? SourceDataset::Openmath : SourceDataset::Bigmath});
    }
    return out;
}

std::string reply(const std::string& problem, const std::string& response) {
    return nlohmann::json{{"problem_translation", problem}, {"step_by_step_response", response}}.dump();
}

MockRule translation_rule(std::string prefix, std::string content) {
    MockRule r;
    r.name = prefix;
    r.request_id_prefix = std::move(prefix);
    r.replies.push_back(MockReply::ok(std::move(content)));
    return r;
}

// Echoes the user message back inside both fields: every numeral survives.
void script_faithful(MockRig& rig) {
    MockRule r;
    r.name = "faithful";
    r.request_id_prefix = "translate:";
    r.user_regex = "Math Problem: ([\\s\\S]*)\\nAnswer: ([\\s\\S]*)\\nLanguage: (.*)$";
    r.replies.push_back(MockReply::ok(
        R"({"problem_translation": "[${3}] ${json:1}", "step_by_step_response": "[${3}] ${json:2}"})"));
    rig.backend->add_rule(r);
}

}  // namespace

TEST(Sampling, DistinctPairsExactCounts) {
    const auto pairs = make_pairs(100);
    auto a = sample_assignments(pairs, {{"yor", 10}, {"hau", 10}}, 7);
    ASSERT_EQ(a.size(), 20u);
    std::set<std::string> ids;
    std::map<std::string, int> per;
    for (const auto& x : a) {
        ids.insert(x.pair_id);
        ++per[x.target_language];
    }
    EXPECT_EQ(ids.size(), 20u);
    EXPECT_EQ(per["yor"], 10);
    EXPECT_EQ(per["hau"], 10);
    EXPECT_EQ(a, sample_assignments(pairs, {{"yor", 10}, {"hau", 10}}, 7));
    EXPECT_NE(a, sample_assignments(pairs, {{"yor", 10}, {"hau", 10}}, 8));
}

TEST(Sampling, InsufficientPairs) {
    const auto pairs = make_pairs(5);
    try {
        sample_assignments(pairs, {{"yor", 10}}, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientPairs);
    }
}

TEST(Verify, LollipopsPass) {
    auto c = verify_translation(kLollipops, "Jason ní suwiti 20 ... 12", "20 - 12 = 8\n8");
    EXPECT_TRUE(c.passed()) << c.describe();
}

TEST(Verify, WordsOnlyListsBoth) {
    auto c = verify_translation(kLollipops, "Jason had twenty lollipops and now twelve", "20 - 12 = 8");
    EXPECT_FALSE(c.passed());
    EXPECT_EQ(c.missing_in_problem, (std::vector<std::string>{"20", "12"}));
    EXPECT_TRUE(c.missing_in_response.empty());
}

TEST(Verify, NoDigitsIsVacuousPass) {
    SourcePair p{"x", "How many legs does a bird have?", "two", SourceDataset::Openmath};
    EXPECT_TRUE(verify_translation(p, "anything", "anything").passed());
}

TEST(Verify, GroupSeparatorsNormalized) {
    SourcePair p{"x", "It costs 3,600 naira.", "3600", SourceDataset::Openmath};
    EXPECT_FALSE(verify_translation(p, "O jẹ 3 600 naira.", "3.600").passed());
    EXPECT_TRUE(verify_translation(p, "O jẹ 3 600 naira.", "Idahun 3600").passed());
}

TEST(TranslatePair, Accepted) {
    MockRig rig;
    script_faithful(rig);
    auto r = translate_pair(kLollipops, "yor", rig.gw());
    EXPECT_EQ(r.source, RecordSource::TranslatedBigmath);
    EXPECT_EQ(r.provenance, "gsm-1");
    EXPECT_EQ(r.final_answer, "8");
    EXPECT_EQ(r.prompt.rfind("[Yoruba]", 0), 0u);
}

TEST(TranslatePair, DroppedNumeralIsNumberPreservationFailure) {
    MockRig rig;
    rig.backend->add_rule(translation_rule("translate:", reply("Jason ní 20 suwiti.", "20 - 12 = 8\n8")));
    try {
        translate_pair(kLollipops, "yor", rig.gw());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NumberPreservation);
        EXPECT_NE(std::string(e.what()).find("12"), std::string::npos);
    }
}

TEST(TranslatePair, WrongKeysIsParseFailure) {
    MockRig rig;
    rig.backend->add_rule(translation_rule("translate:", R"({"translation": "a", "response": "b"})"));
    try {
        translate_pair(kLollipops, "yor", rig.gw());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseFailure);
    }
}

TEST(TranslateBatch, FailuresReplacedFromUnusedPairs) {
    MockRig rig;
    const auto pairs = make_pairs(40);
    const LanguageQuota quota{{"yor", 5}, {"hau", 5}};
    const auto first = sample_assignments(pairs, quota, 3);
    // Break two of the initial assignments: they must be replaced, not retried.
    rig.backend->add_rule(translation_rule("translate:yor:" + first[0].pair_id, "not json"));
    rig.backend->add_rule(translation_rule("translate:hau:" + first[7].pair_id, reply("no digits", "none")));
    script_faithful(rig);

    auto r = translate_batch(pairs, quota, 3, rig.gw());
    EXPECT_TRUE(r.quota_met());
    ASSERT_EQ(r.records.size(), 10u);
    EXPECT_EQ(r.failures.size(), 2u);
    EXPECT_EQ(r.assignments.size(), 12u);
    std::set<std::string> ids;
    for (const auto& a : r.assignments) EXPECT_TRUE(ids.insert(a.pair_id).second) << a.pair_id;
    std::set<std::string> provenance;
    for (const auto& rec : r.records) {
        provenance.insert(rec.provenance);
        const auto& src = *std::find_if(pairs.begin(), pairs.end(), [&](const auto& p) { return p.pair_id == rec.provenance; });
        EXPECT_TRUE(verify_translation(src, rec.prompt, rec.response).passed());
    }
    EXPECT_EQ(provenance.size(), r.records.size());
    EXPECT_FALSE(provenance.contains(first[0].pair_id));
}

TEST(TranslateBatch, ReserveExhaustedReportsUnmet) {
    MockRig rig;
    rig.backend->add_rule(translation_rule("translate:", "garbage"));
    const auto pairs = make_pairs(6);
    auto r = translate_batch(pairs, {{"yor", 4}}, 1, rig.gw());
    EXPECT_FALSE(r.quota_met());
    EXPECT_EQ(r.unmet.at("yor"), 4u);
    EXPECT_EQ(r.assignments.size(), 6u);
}

TEST(SourcePairs, ReaderRejectsDuplicates) {
    TempDir dir;
    write_text(dir / "s.jsonl", R"({"pair_id": "a", "problem": "1+1", "answer": "2", "dataset": "bigmath"}
{"pair_id": "a", "problem": "2+2", "answer": "4", "dataset": "openmath"}
)");
    try {
        read_source_pairs(dir / "s.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Schema);
        EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
    }
}
