#include <gtest/gtest.h>

#include "speye/text.hpp"

using namespace speye;

TEST(Text, NormalizeFoldsCaseAndCollapsesWhitespace)
{
    EXPECT_EQ(text::normalize("  Sign\tIn\n  WITH  Google "), "sign in with google");
    EXPECT_EQ(text::normalize("Continue\xC2\xA0with Apple"), "continue with apple");
    EXPECT_EQ(text::normalize(""), "");
    EXPECT_EQ(text::normalize(" \n\t "), "");
}

TEST(Text, FindWordRespectsAlphanumericBoundaries)
{
    EXPECT_EQ(text::find_word("sign in with google", "sign in"), 0u);
    EXPECT_EQ(text::find_word("please sign in.", "sign in"), 7u);
    EXPECT_EQ(text::find_word("signing in", "sign in"), std::string::npos);
    EXPECT_EQ(text::find_word("resign in", "sign in"), std::string::npos);
    EXPECT_EQ(text::find_word("color use", "or use"), std::string::npos);
    EXPECT_EQ(text::find_word("or use google", "or use"), 0u);
}

TEST(Text, TrimAndCompare)
{
    EXPECT_EQ(text::trim("  a b \r\n"), "a b");
    EXPECT_TRUE(text::iequals("GET", "get"));
    EXPECT_FALSE(text::iequals("GET", "gets"));
    EXPECT_TRUE(text::istarts_with("JavaScript:void(0)", "javascript:"));
    EXPECT_EQ(text::to_lower("AbC-1"), "abc-1");
}

TEST(Text, SplitKeepsEmptyFields)
{
    EXPECT_EQ(text::split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
    EXPECT_EQ(text::split("", ','), (std::vector<std::string>{""}));
}
