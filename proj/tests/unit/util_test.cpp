#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "afrisynth/error.hpp"
#include "afrisynth/languages.hpp"
#include "afrisynth/prompts.hpp"
#include "afrisynth/util.hpp"
#include "test_support.hpp"

using namespace afrisynth;
using testing_support::TempDir;
using testing_support::write_text;

TEST(Util, ContentIdLengthPrefixed) {
    EXPECT_NE(content_id({"ab", "c"}), content_id({"a", "bc"}));
    EXPECT_EQ(content_id({"x"}).size(), 16u);
    EXPECT_EQ(content_id({"x", "y"}), content_id(std::vector<std::string>{"x", "y"}));
}

TEST(Util, SplitWords) {
    auto w = split_words("  a\tbb \n ccc ");
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(w[1], "bb");
    EXPECT_EQ(word_count(""), 0u);
}

TEST(Util, SeededPermutationIsAPermutationAndDeterministic) {
    auto p = seeded_permutation(100, 42);
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> iota(100);
    std::iota(iota.begin(), iota.end(), 0);
    EXPECT_EQ(sorted, iota);
    EXPECT_EQ(p, seeded_permutation(100, 42));
    EXPECT_NE(p, seeded_permutation(100, 43));
    EXPECT_TRUE(seeded_permutation(0, 1).empty());
}

TEST(Util, JsonlReaderNamesBadLine) {
    TempDir dir;
    write_text(dir / "x.jsonl", "{\"a\":1}\n\n{oops\n");
    try {
        for_each_jsonl(dir / "x.jsonl", [](std::size_t, const nlohmann::json&) {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Schema);
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
}

TEST(Util, AtomicWriteLeavesNoTemp) {
    TempDir dir;
    write_file_atomic(dir / "f.txt", "hello");
    EXPECT_EQ(read_file(dir / "f.txt"), "hello");
    EXPECT_FALSE(std::filesystem::exists(dir / "f.txt.tmp"));
}

TEST(Languages, DefaultTargetsAreTheNine) {
    const std::vector<std::string> want{"yor", "ibo", "hau", "swa", "zul", "pcm", "som", "afr", "ara"};
    EXPECT_EQ(default_target_languages(), want);
}

TEST(Languages, ResolveByCodeNameAlias) {
    EXPECT_EQ(resolve_language("yor"), "yor");
    EXPECT_EQ(resolve_language("Yoruba"), "yor");
    EXPECT_EQ(resolve_language("isiZulu"), "zul");
    EXPECT_EQ(resolve_language("Nigerian Pidgin"), "pcm");
    EXPECT_FALSE(resolve_language("Klingon"));
    EXPECT_EQ(language_name("hau"), "Hausa");
}

TEST(Prompts, JudgeTemplateCarriesInputs) {
    auto p = prompts::judge("Q?", "8", "gen");
    EXPECT_NE(p.system.find("[[1]]"), std::string::npos);
    EXPECT_NE(p.user.find("Q?"), std::string::npos);
    EXPECT_NE(p.user.find("Golden Answer: 8"), std::string::npos);
}

TEST(Prompts, MathProblemFillsSeedPlaceholders) {
    auto p = prompts::math_problem("Yoruba", "Seed text here", "A teacher", "Yoruba");
    EXPECT_EQ(p.system.find("{seed_language}"), std::string::npos);
    EXPECT_EQ(p.system.find("{seed_prompt}"), std::string::npos);
    EXPECT_NE(p.system.find("Seed text here"), std::string::npos);
    EXPECT_NE(p.user.find("A teacher"), std::string::npos);
}
