#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "epitext/textproc.hpp"
#include "epitext/utf8.hpp"

using namespace epitext;
using textproc::SentenceSplitter;
using textproc::Token;

namespace {

std::vector<std::string> normals(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.normalized);
  return out;
}

/// Random strings mixing Polish letters, digits and punctuation.
std::string random_string(std::mt19937& rng, std::size_t max_len) {
  static const std::vector<std::string> pool = {
      "a", "b", "z", "A", "Z", "0", "5", "9", ".", ",", "-", "/", "!", "?", "(", ")",
      "\xC4\x85" /* ą */, "\xC5\xBC" /* ż */, "\xC5\x81" /* Ł */, "\xC3\x93" /* Ó */,
      "\xC4\x98" /* Ę */, "\xC5\x9B" /* ś */, " ", "\xE2\x80\x94" /* em dash */};
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::string out;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out += pool[pick(rng)];
  return out;
}

}  // namespace

TEST_CASE("normalize_token lowercases and strips edge punctuation") {
  CHECK(textproc::normalize_token("Wysypk\xC4\x85,") == "wysypk\xC4\x85");
  CHECK(textproc::normalize_token("ZYRTEC.") == "zyrtec");
  CHECK(textproc::normalize_token("---") == "");
  CHECK(textproc::normalize_token("(Pacjentka)") == "pacjentka");
  // Polish capitals with diacritics lower correctly.
  CHECK(textproc::normalize_token("\xC5\xBBabka") == "\xC5\xBC" "abka");  // Żabka
  CHECK(textproc::normalize_token("\xC5\x81UK") == "\xC5\x82uk");         // ŁUK
}

TEST_CASE("normalize_token is idempotent and never lengthens") {
  std::mt19937 rng(20240811);
  for (int i = 0; i < 1000; ++i) {
    const std::string s = random_string(rng, 12);
    const std::string once = textproc::normalize_token(s);
    CHECK(textproc::normalize_token(once) == once);
    CHECK(once.size() <= s.size());
  }
}

TEST_CASE("tokenize keeps interior separators and drops pure punctuation") {
  CHECK(normals(textproc::tokenize("Pacjentka, lat 5.")) ==
        std::vector<std::string>{"pacjentka", "lat", "5"});
  CHECK(normals(textproc::tokenize("5 i 4/12")) == std::vector<std::string>{"5", "i", "4/12"});
  CHECK(textproc::tokenize("---").empty());
  CHECK(normals(textproc::tokenize("waga 5.5 kg")) == std::vector<std::string>{"waga", "5.5", "kg"});
  CHECK(normals(textproc::tokenize("wiek 2,5 roku")) == std::vector<std::string>{"wiek", "2,5", "roku"});
}

TEST_CASE("token offsets point at the surface and strictly increase") {
  const std::string text = "  Ala  ma kota.";
  const auto tokens = textproc::tokenize(text);
  REQUIRE(tokens.size() == 3);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    CHECK(text.compare(tokens[i].offset, tokens[i].surface.size(), tokens[i].surface) == 0);
    if (i > 0) CHECK(tokens[i].offset > tokens[i - 1].offset);
  }
}

TEST_CASE("split_sentences basics") {
  const SentenceSplitter splitter;
  CHECK(splitter.split("Ala ma kota. Kot \xC5\x9Bpi.").size() == 2);
  CHECK(splitter.split("Pacjent lat 5 4/12.").size() == 1);
  CHECK(splitter.split("Kaszel").size() == 1);
  CHECK(splitter.split("Kaszel")[0].tokens.size() == 1);
  CHECK(splitter.split("").empty());
  CHECK(splitter.split("   ").empty());
  // '!' and '?' terminate; a terminator inside a token ("5.5") does not.
  CHECK(splitter.split("Bez zmian! Kontrola? Tak.").size() == 3);
  CHECK(splitter.split("Waga 5.5 kg przy przyj\xC4\x99\x63iu.").size() == 1);
}

TEST_CASE("abbreviation guard suppresses the split") {
  const SentenceSplitter splitter;  // default guards include np and r
  CHECK(splitter.split("Kontrola np. za tydzie\xC5\x84. Wypis.").size() == 2);
  CHECK(splitter.split("Hospitalizowany w 2023 r. bez powik\xC5\x82\x61\xC5\x84.").size() == 1);
  // Custom list replaces the default.
  const SentenceSplitter bare{std::vector<std::string>{}};
  CHECK(bare.split("Kontrola np. za tydzie\xC5\x84. Wypis.").size() == 3);
}

TEST_CASE("the fraction token survives segmentation and tokenization") {
  const SentenceSplitter splitter;
  const auto sentences = splitter.split("Pacjent lat 5 4/12.");
  REQUIRE(sentences.size() == 1);
  CHECK(normals(sentences[0].tokens) == std::vector<std::string>{"pacjent", "lat", "5", "4/12"});
}

TEST_CASE("sentence spans cover every non-whitespace character exactly once") {
  std::mt19937 rng(7);
  const SentenceSplitter splitter;
  for (int i = 0; i < 300; ++i) {
    const std::string text = random_string(rng, 40);
    const auto sentences = splitter.split(text);

    std::string joined;
    std::size_t prev_end = 0;
    for (const auto& s : sentences) {
      CHECK(s.begin >= prev_end);  // ordered, non-overlapping
      CHECK(s.end > s.begin);
      prev_end = s.end;
      joined += text.substr(s.begin, s.end - s.begin);
    }

    const auto strip_ws = [](const std::string& in) {
      std::string out;
      std::size_t k = 0;
      while (k < in.size()) {
        const std::size_t at = k;
        if (!utf8::is_space(utf8::decode_next(in, k))) out += in.substr(at, k - at);
      }
      return out;
    };
    CHECK(strip_ws(joined) == strip_ws(text));
  }
}

TEST_CASE("document token count equals the sum over sentences") {
  std::mt19937 rng(13);
  const SentenceSplitter splitter;
  for (int i = 0; i < 300; ++i) {
    const std::string text = random_string(rng, 40);
    std::size_t total = 0;
    for (const auto& s : splitter.split(text)) total += s.tokens.size();
    CHECK(total == textproc::tokenize(text).size());
  }
}
