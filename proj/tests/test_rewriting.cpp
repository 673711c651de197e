#include <doctest.h>

#include <set>

#include "metamodel/error.hpp"
#include "metamodel/polynomial.hpp"
#include "metamodel/rewriting.hpp"

using namespace metamodel;

namespace {

// Every word over n letters with length <= max_len, shortlex order.
std::vector<Word> all_words(std::size_t n, std::size_t max_len) {
  std::vector<Word> out{Word{}};
  std::vector<Word> level{Word{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const auto& w : level) {
      for (std::size_t g = 0; g < n; ++g) {
        Word v = w;
        v.letters.push_back(g);
        next.push_back(v);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return out;
}

bool has_repeated_one(const Word& w) {
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w.letters[i] == 1 && w.letters[i - 1] == 1) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("word parsing and printing") {
  auto p = polynomial_monoid();
  CHECK(p.generators() == std::vector<std::string>{"T_x", "T_1"});
  CHECK(p.parse_word("T_x T_1 T_1").letters == std::vector<std::size_t>{0, 1, 1});
  CHECK(p.parse_word("ε").empty());
  CHECK(p.parse_word("").empty());
  CHECK(p.format(p.parse_word("T_x T_1")) == "T_xT_1");
  CHECK(p.format(Word{}) == "ε");
  CHECK_THROWS_AS(p.parse_word("T_y"), InvalidArgument);
}

TEST_CASE("normal forms") {
  auto p = polynomial_monoid();
  CHECK(normalize(p, p.parse_word("T_1 T_1 T_x")) == p.parse_word("T_1 T_x"));
  CHECK(normalize(p, p.parse_word("T_1 T_1 T_1")) == p.parse_word("T_1"));
  CHECK(normalize(p, p.parse_word("T_x T_1 T_x")) == p.parse_word("T_x T_1 T_x"));
  CHECK(normalize(p, Word{}).empty());
}

TEST_CASE("normalization is idempotent and never grows") {
  auto p = polynomial_monoid();
  for (const auto& w : all_words(2, 8)) {
    const Word n = normalize(p, w);
    CHECK(normalize(p, n) == n);
    CHECK(n.size() <= w.size());
    CHECK_FALSE(has_repeated_one(n));
  }
}

TEST_CASE("enumerate_words matches raw enumeration") {
  auto p = polynomial_monoid();
  for (std::size_t len = 0; len <= 7; ++len) {
    std::vector<Word> oracle;
    for (const auto& w : all_words(2, len)) {
      if (!has_repeated_one(w)) oracle.push_back(w);
    }
    CHECK(enumerate_words(p, len) == oracle);
  }
  // Irreducible words of length n number Fib(n + 2).
  CHECK(enumerate_words(p, 5).size() == 1 + 2 + 3 + 5 + 8 + 13);
}

TEST_CASE("shortlex order") {
  CHECK(shortlex_less(Word{{1}}, Word{{0, 0}}));
  CHECK(shortlex_less(Word{{0, 1}}, Word{{1, 0}}));
  CHECK_FALSE(shortlex_less(Word{{0}}, Word{{0}}));
  CHECK(shortlex_less(Word{}, Word{{0}}));
}

TEST_CASE("rules must decrease") {
  CHECK_THROWS_AS(MonoidPresentation::parse({"T_x", "T_1"}, {"T_1 -> T_1 T_1"}), NonterminatingRule);
  CHECK_THROWS_AS(MonoidPresentation::parse({"T_x", "T_1"}, {"T_x -> T_1"}), NonterminatingRule);
  CHECK_THROWS_AS(MonoidPresentation::parse({"T_x", "T_1"}, {"T_x -> T_x"}), NonterminatingRule);
  CHECK_NOTHROW(MonoidPresentation::parse({"T_x", "T_1"}, {"T_1 -> T_x"}));
}

TEST_CASE("critical pairs") {
  CHECK(unresolved_critical_pairs(polynomial_monoid()).empty());
  auto p = MonoidPresentation::parse({"a", "b"}, {"a b -> a", "b a -> b"});
  auto pairs = unresolved_critical_pairs(p);
  REQUIRE_FALSE(pairs.empty());
  for (const auto& cp : pairs) CHECK_FALSE(cp.left == cp.right);
  bool aba = false;
  for (const auto& cp : pairs) aba |= p.format(cp.overlap) == "aba";
  CHECK(aba);
}

TEST_CASE("the action respects the relation") {
  auto p = polynomial_monoid();
  const FormalPolynomial zero({0});
  std::size_t checked = 0;
  for (const auto& w : all_words(2, 5)) {
    CHECK(act(w, zero) == act(normalize(p, w), zero));
    CHECK(act(w, FormalPolynomial({1, 3})) == act(normalize(p, w), FormalPolynomial({1, 3})));
    checked += !w.empty();
  }
  CHECK(checked == 62);
}
