#include <gtest/gtest.h>

#include "genremb/text.hpp"

using namespace genremb;

TEST(Text, FoldLowercasesAscii) { EXPECT_EQ(text::fold("Hard_Rock"), "hard_rock"); }

TEST(Text, FoldComposesAndLowercasesUnicode) {
  // "ROCK PSICODE" + combining acute + "LICO"
  EXPECT_EQ(text::fold("ROCK PSICODE\xCC\x81LICO"), "rock psicod\xC3\xA9lico");
  EXPECT_EQ(text::fold("\xC3\x89LECTRO"), "\xC3\xA9lectro");
}

TEST(Text, FoldIsIdempotent) {
  for (const char* s : {"Rock_alternatif", "Balada_rom\xC3\xA1ntica", "M\xC3\x9cSIK", "drum'n'bass"}) {
    const auto once = text::fold(s);
    EXPECT_EQ(text::fold(once), once);
  }
}

TEST(Text, SplitOnNonAlphanumericRuns) {
  EXPECT_EQ(text::split_alnum("drum'n'bass"), (std::vector<std::string>{"drum", "n", "bass"}));
  EXPECT_EQ(text::split_alnum("--a__b--"), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(text::split_alnum("---").empty());
  EXPECT_EQ(text::split_alnum("rock_psych\xC3\xA9"), (std::vector<std::string>{"rock", "psych\xC3\xA9"}));
  EXPECT_EQ(text::split_alnum("80s"), (std::vector<std::string>{"80s"}));
}

TEST(Text, CombiningMarksStayInTheWord) {
  EXPECT_EQ(text::split_alnum("e\xCC\x81t\xC3\xA9"), (std::vector<std::string>{"e\xCC\x81t\xC3\xA9"}));
}

TEST(Text, EscapeKeyRoundTrip) {
  for (const char* s : {"plain", "uk garage", "100% pure", "%20 literal", "tab\there"}) {
    const auto escaped = text::escape_key(s);
    EXPECT_EQ(escaped.find(' '), std::string::npos);
    EXPECT_EQ(text::unescape_key(escaped), s);
  }
}
