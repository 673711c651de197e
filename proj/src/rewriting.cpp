#include "metamodel/rewriting.hpp"

#include <algorithm>
#include <sstream>

#include "metamodel/error.hpp"

namespace metamodel {

bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.letters < b.letters;
}

MonoidPresentation::MonoidPresentation(std::vector<std::string> generators,
                                       std::vector<RewriteRule> rules)
    : generators_(std::move(generators)), rules_(std::move(rules)) {
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    if (generators_[i].empty()) throw InvalidArgument("generator names must be nonempty");
    for (std::size_t j = 0; j < i; ++j) {
      if (generators_[i] == generators_[j]) throw InvalidArgument("duplicate generator " + generators_[i]);
    }
  }
  for (const auto& rule : rules_) {
    for (const Word* w : {&rule.lhs, &rule.rhs}) {
      for (std::size_t letter : w->letters) {
        if (letter >= generators_.size()) throw InvalidArgument("rule uses an undeclared generator");
      }
    }
    if (rule.lhs.empty()) throw NonterminatingRule("rule with empty left-hand side");
    if (!shortlex_less(rule.rhs, rule.lhs)) {
      throw NonterminatingRule("rule " + format(rule.lhs) + " -> " + format(rule.rhs) +
                               " does not decrease in shortlex order");
    }
  }
}

MonoidPresentation MonoidPresentation::parse(std::vector<std::string> generators,
                                             const std::vector<std::string>& rules) {
  MonoidPresentation names(generators, {});
  std::vector<RewriteRule> parsed;
  for (const auto& text : rules) {
    const auto arrow = text.find("->");
    if (arrow == std::string::npos) throw InvalidArgument("rule '" + text + "' lacks '->'");
    parsed.push_back({names.parse_word(std::string_view(text).substr(0, arrow)),
                      names.parse_word(std::string_view(text).substr(arrow + 2))});
  }
  return MonoidPresentation(std::move(generators), std::move(parsed));
}

std::optional<std::size_t> MonoidPresentation::generator_index(std::string_view name) const {
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    if (generators_[i] == name) return i;
  }
  return std::nullopt;
}

Word MonoidPresentation::parse_word(std::string_view text) const {
  Word w;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    if (token == "ε") continue;
    auto idx = generator_index(token);
    if (!idx) throw InvalidArgument("unknown generator '" + token + "'");
    w.letters.push_back(*idx);
  }
  return w;
}

std::string MonoidPresentation::format(const Word& w) const {
  if (w.empty()) return "ε";
  std::string out;
  for (std::size_t letter : w.letters) out += generators_.at(letter);
  return out;
}

MonoidPresentation polynomial_monoid() {
  return MonoidPresentation::parse({"T_x", "T_1"}, {"T_1 T_1 -> T_1"});
}

namespace {

bool matches_at(const std::vector<std::size_t>& letters, std::size_t pos, const Word& pattern) {
  if (pos + pattern.size() > letters.size()) return false;
  return std::equal(pattern.letters.begin(), pattern.letters.end(), letters.begin() + pos);
}

bool is_reducible(const MonoidPresentation& p, const std::vector<std::size_t>& letters) {
  for (std::size_t pos = 0; pos < letters.size(); ++pos) {
    for (const auto& rule : p.rules()) {
      if (matches_at(letters, pos, rule.lhs)) return true;
    }
  }
  return false;
}

Word rewrite_at(const Word& w, std::size_t pos, const RewriteRule& rule) {
  Word out;
  out.letters.assign(w.letters.begin(), w.letters.begin() + pos);
  out.letters.insert(out.letters.end(), rule.rhs.letters.begin(), rule.rhs.letters.end());
  out.letters.insert(out.letters.end(), w.letters.begin() + pos + rule.lhs.size(), w.letters.end());
  return out;
}

}  // namespace

Word normalize(const MonoidPresentation& p, const Word& w) {
  Word current = w;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t pos = 0; pos < current.size() && !changed; ++pos) {
      for (const auto& rule : p.rules()) {
        if (matches_at(current.letters, pos, rule.lhs)) {
          current = rewrite_at(current, pos, rule);
          changed = true;
          break;
        }
      }
    }
  }
  return current;
}

std::vector<Word> enumerate_words(const MonoidPresentation& p, std::size_t max_len) {
  // Irreducible words are closed under prefixes, and a word of length
  // <= max_len normalizes to an irreducible word no longer than itself, so
  // growing irreducible words letter by letter yields exactly the set.
  std::vector<Word> out{Word{}};
  std::vector<Word> layer{Word{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const auto& w : layer) {
      for (std::size_t g = 0; g < p.generators().size(); ++g) {
        Word ext = w;
        ext.letters.push_back(g);
        if (!is_reducible(p, ext.letters)) next.push_back(std::move(ext));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  std::sort(out.begin(), out.end(), shortlex_less);
  return out;
}

std::vector<CriticalPair> unresolved_critical_pairs(const MonoidPresentation& p) {
  std::vector<CriticalPair> out;
  const auto& rules = p.rules();
  auto check = [&](const Word& overlap, std::size_t pos1, const RewriteRule& r1, std::size_t pos2,
                   const RewriteRule& r2) {
    Word left = normalize(p, rewrite_at(overlap, pos1, r1));
    Word right = normalize(p, rewrite_at(overlap, pos2, r2));
    if (!(left == right)) out.push_back({overlap, std::move(left), std::move(right)});
  };
  for (const auto& r1 : rules) {
    for (const auto& r2 : rules) {
      const auto& a = r1.lhs.letters;
      const auto& b = r2.lhs.letters;
      // Proper suffix of a equal to a proper prefix of b.
      for (std::size_t k = 1; k < a.size() && k < b.size(); ++k) {
        if (!std::equal(a.end() - static_cast<std::ptrdiff_t>(k), a.end(), b.begin())) continue;
        Word overlap;
        overlap.letters = a;
        overlap.letters.insert(overlap.letters.end(), b.begin() + static_cast<std::ptrdiff_t>(k), b.end());
        check(overlap, 0, r1, a.size() - k, r2);
      }
      // b occurring inside a.
      if (&r1 != &r2 && b.size() <= a.size()) {
        for (std::size_t pos = 0; pos + b.size() <= a.size(); ++pos) {
          if (matches_at(a, pos, r2.lhs)) check(r1.lhs, 0, r1, pos, r2);
        }
      }
    }
  }
  return out;
}

}  // namespace metamodel
