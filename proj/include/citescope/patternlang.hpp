#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/labels.hpp"

namespace citescope {

class PatternError : public std::runtime_error {
 public:
  enum class Kind { DuplicateCategory, EmptyCategory, UnknownCategory, EmptyPattern, Malformed };
  PatternError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

struct LexiconCategory {
  std::string name;                       // upper case, e.g. "CHANGE_NOUN"
  std::set<std::string> surfaces;         // lower case word forms
  std::optional<std::string> pos_filter;  // POS tag prefix, e.g. "NN"

  bool accepts(std::string_view lower_surface, std::string_view pos) const;
};

class Lexicon {
 public:
  /// Throws PatternError(DuplicateCategory | EmptyCategory).
  void add(LexiconCategory category);

  const LexiconCategory* find(std::string_view name) const;
  std::size_t size() const { return by_name_.size(); }
  const std::map<std::string, LexiconCategory, std::less<>>& categories() const { return by_name_; }

  /// Names of all categories accepting the token, in lexicographic order.
  std::vector<const LexiconCategory*> categories_for(std::string_view lower_surface,
                                                     std::string_view pos) const;

  /// Lexicon file text ("NAME[:POS]" header, indented surfaces).
  std::string serialize() const;
  std::uint64_t version_hash() const;

 private:
  std::map<std::string, LexiconCategory, std::less<>> by_name_;
  std::unordered_map<std::string, std::vector<std::string>> by_surface_;
};

Lexicon parse_lexicon(std::string_view text);
Lexicon load_lexicon(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

struct PatternElement {
  enum class Kind { Literal, Category, PosWildcard, CitationSlot };
  Kind kind = Kind::Literal;
  std::string value;  // literal (lower), category name (upper), POS prefix (upper)

  static PatternElement literal(std::string_view w);
  static PatternElement category(std::string_view name);
  static PatternElement wildcard(std::string_view pos_prefix);
  static PatternElement citation();

  std::string text() const;
  friend bool operator==(const PatternElement&, const PatternElement&) = default;
  friend auto operator<=>(const PatternElement&, const PatternElement&) = default;
};

/// Which context sentences a pattern may fire in: Preceding = offset -1,
/// Citing = offset 0, Following = offsets +1..+3.
enum class Scope { Preceding, Citing, Following };
inline constexpr std::size_t kScopeCount = 3;
std::string_view to_string(Scope s);
std::optional<Scope> parse_scope(std::string_view s);
bool scope_covers(Scope s, int offset);

enum class Provenance { Curated, Bootstrapped };
std::string_view to_string(Provenance p);

struct Pattern {
  std::vector<PatternElement> elements;
  Scope scope = Scope::Citing;
  Function function = Function::Background;
  Provenance provenance = Provenance::Curated;

  std::string text() const;
  std::size_t wildcard_count() const;
  friend bool operator==(const Pattern&, const Pattern&) = default;
};

/// Whitespace separated elements: "@Name" category, "#X" POS wildcard,
/// "citation" slot, anything else a literal. Throws PatternError.
Pattern parse_pattern(std::string_view text, const Lexicon& lexicon, Scope scope = Scope::Citing,
                      Function function = Function::Background,
                      Provenance provenance = Provenance::Curated);

class PatternSet {
 public:
  PatternSet() = default;
  explicit PatternSet(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

  /// Throws PatternError(UnknownCategory) if an element names a missing category.
  void add(Pattern pattern);
  void append(const PatternSet& other);

  const std::vector<Pattern>& patterns() const { return patterns_; }
  const Lexicon& lexicon() const { return lexicon_; }
  std::size_t size() const { return patterns_.size(); }

  /// Pattern file text: "scope<TAB>function<TAB>pattern<TAB>provenance" per line.
  std::string serialize() const;
  std::uint64_t version_hash() const;

 private:
  Lexicon lexicon_;
  std::vector<Pattern> patterns_;
};

PatternSet parse_pattern_file(std::string_view text, const Lexicon& lexicon);
PatternSet load_patterns(const std::filesystem::path& path, const Lexicon& lexicon);

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

/// A sentence token as seen by the matcher. Each mention span is collapsed to
/// a single citation token covering the original range.
struct MatchToken {
  std::string lower;
  std::string pos;  // upper case
  bool citation = false;
  TokenSpan source;
};

std::vector<MatchToken> match_view(const Sentence& sentence, const std::vector<TokenSpan>& mention_spans);
/// View of one context sentence with all of the paper's mentions in it collapsed.
std::vector<MatchToken> match_view(const CitationContext& ctx, int offset);

struct PatternMatch {
  std::size_t pattern_id = 0;
  Scope scope = Scope::Citing;
  int sentence_offset = 0;
  TokenSpan span;  // original token indices in that sentence

  friend bool operator==(const PatternMatch&, const PatternMatch&) = default;
  friend auto operator<=>(const PatternMatch&, const PatternMatch&) = default;
};

/// Trie over interned element symbols. Immutable after construction.
class Matcher {
 public:
  Matcher() = default;
  explicit Matcher(const PatternSet& patterns);

  std::size_t pattern_count() const { return pattern_count_; }
  /// Duplicate patterns collapse onto the id of their first occurrence.
  std::size_t canonical_id(std::size_t pattern_id) const { return canonical_[pattern_id]; }
  std::uint64_t version_hash() const { return version_hash_; }

  /// Matches in one tokenized sentence for patterns of the given scope.
  void match_tokens(const std::vector<MatchToken>& tokens, Scope scope, int offset,
                    std::vector<PatternMatch>& out) const;

  /// All matches in a context, sorted by (offset, span, pattern id).
  std::vector<PatternMatch> match_context(const CitationContext& ctx) const;

 private:
  struct Node {
    std::vector<std::pair<int, int>> children;  // (symbol, node), sorted by symbol
    std::vector<std::size_t> terminals;
    int child(int symbol) const;
  };
  void symbols_for(const MatchToken& tok, std::vector<int>& out) const;

  std::size_t pattern_count_ = 0;
  std::uint64_t version_hash_ = 0;
  std::vector<std::size_t> canonical_;
  std::array<int, kScopeCount> roots_{};
  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> literal_ids_;
  std::unordered_map<std::string, int> category_ids_;
  std::unordered_map<std::string, int> wildcard_ids_;
  std::vector<std::pair<int, LexiconCategory>> used_categories_;
  std::size_t max_wildcard_len_ = 0;
  int citation_id_ = -1;
};

Matcher compile(const PatternSet& patterns);
std::vector<PatternMatch> match_context(const Matcher& matcher, const CitationContext& ctx);

}  // namespace citescope
