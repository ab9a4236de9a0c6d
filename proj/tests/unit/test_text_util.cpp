#include <doctest.h>

#include <random>
#include <string>

#include "kgprover/text_util.hpp"

using namespace kgp;

TEST_SUITE("text_util") {

TEST_CASE("trim and case helpers") {
    CHECK(text::trim("  a b \n") == "a b");
    CHECK(text::trim_right(" a \t\n") == " a");
    CHECK(text::trim("") == "");
    CHECK(text::to_lower_ascii("AbC-É") == "abc-É");
    CHECK(text::iequals("Definition", "DEFINITION"));
    CHECK_FALSE(text::iequals("Def", "Definition"));
    CHECK(text::istarts_with("Definition:Group", "definition:"));
}

TEST_CASE("split_lines drops only the final empty piece") {
    auto lines = text::split_lines("a\n\nb\n");
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "a");
    CHECK(lines[1] == "");
    CHECK(lines[2] == "b");
    CHECK(text::split_lines("").empty());
    CHECK(text::split_lines("x").size() == 1);
}

TEST_CASE("normalize_newlines") {
    CHECK(text::normalize_newlines("a\r\nb\rc\n") == "a\nb\nc\n");
}

TEST_CASE("utf8_truncate never splits a sequence") {
    const std::string s = "h\xC3\xA9llo";  // h é l l o
    CHECK(text::utf8_truncate(s, 2) == "h");
    CHECK(text::utf8_truncate(s, 3) == "h\xC3\xA9");
    CHECK(text::utf8_truncate(s, 100) == s);
    CHECK(text::utf8_truncate(s, 0) == "");

    std::mt19937_64 rng(7);
    const std::string pieces[] = {"a", "\xC3\xA9", "\xE2\x88\x80", "\xF0\x9D\x94\xB8"};
    for (int round = 0; round < 200; ++round) {
        std::string t;
        for (int i = 0; i < 20; ++i) t += pieces[rng() % 4];
        std::size_t limit = rng() % (t.size() + 2);
        auto cut = text::utf8_truncate(t, limit);
        CHECK(cut.size() <= limit);
        CHECK(cut.size() + 4 > std::min(limit, t.size()));
        if (cut.size() < t.size()) CHECK((static_cast<unsigned char>(t[cut.size()]) & 0xC0) != 0x80);
    }
}

TEST_CASE("sha256 known vectors") {
    CHECK(text::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(text::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("title_key folds case, underscores and spacing") {
    CHECK(text::title_key(" Definition:Identity_Element ") == "definition:identity element");
    CHECK(text::title_key("Group  Axioms") == text::title_key("group_axioms"));
}

}
