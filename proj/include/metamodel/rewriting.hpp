#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metamodel {

/// A word over a presentation's generators, stored as generator indices.
/// The empty word is the monoid identity.
struct Word {
  std::vector<std::size_t> letters;

  bool empty() const noexcept { return letters.empty(); }
  std::size_t size() const noexcept { return letters.size(); }

  friend bool operator==(const Word&, const Word&) = default;
};

/// Shortlex: shorter first, then lexicographic by generator index.
bool shortlex_less(const Word& a, const Word& b);

struct RewriteRule {
  Word lhs;
  Word rhs;
};

/// Generators plus oriented rules. Every rule must decrease in shortlex
/// order (shorter, or same length and lexicographically smaller), which
/// guarantees that rewriting terminates; otherwise construction throws
/// NonterminatingRule.
class MonoidPresentation {
 public:
  MonoidPresentation(std::vector<std::string> generators, std::vector<RewriteRule> rules);

  /// Rules written as "T_1 T_1 -> T_1" (space-separated generator names).
  static MonoidPresentation parse(std::vector<std::string> generators,
                                  const std::vector<std::string>& rules);

  const std::vector<std::string>& generators() const noexcept { return generators_; }
  const std::vector<RewriteRule>& rules() const noexcept { return rules_; }

  std::optional<std::size_t> generator_index(std::string_view name) const;

  /// Space-separated generator names; "" and "ε" denote the identity.
  Word parse_word(std::string_view text) const;

  /// Generator names concatenated ("T_xT_1"), or "ε".
  std::string format(const Word& w) const;

 private:
  std::vector<std::string> generators_;
  std::vector<RewriteRule> rules_;
};

/// Generators T_x, T_1 with the single relation T_1 T_1 = T_1.
MonoidPresentation polynomial_monoid();

/// Leftmost-first exhaustive rewriting; when several rules match at the
/// same position the first declared wins.
Word normalize(const MonoidPresentation& p, const Word& w);

/// All normal forms of length <= max_len, in shortlex order.
std::vector<Word> enumerate_words(const MonoidPresentation& p, std::size_t max_len);

struct CriticalPair {
  Word overlap;
  Word left;   // normal form after applying the first rule
  Word right;  // normal form after applying the second rule
};

/// Overlaps between rule left-hand sides whose two rewrites do not join.
/// Empty means the presentation is locally confluent.
std::vector<CriticalPair> unresolved_critical_pairs(const MonoidPresentation& p);

}  // namespace metamodel
