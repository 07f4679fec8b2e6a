#pragma once

// Element-by-element pattern scanner used as the reference for the compiled
// matcher, plus random lexicon/pattern/sentence generators for property tests.
// Deliberately shares no matching code with the library.

#include <algorithm>
#include <cctype>
#include <string>
#include <tuple>
#include <vector>

#include "citescope/patternlang.hpp"
#include "citescope/util.hpp"

namespace oracle {

using namespace citescope;

struct ScanToken {
  std::string lower;
  std::string pos;
  bool citation;
  int first;
  int last;
};

inline std::string lower_of(const std::string& s) {
  std::string out = s;
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string upper_of(const std::string& s) {
  std::string out = s;
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<ScanToken> scan_tokens(const Sentence& s, const std::vector<TokenSpan>& spans) {
  std::vector<ScanToken> out;
  int i = 0;
  const int n = static_cast<int>(s.tokens.size());
  while (i < n) {
    int end = -1;
    for (const auto& sp : spans) {
      if (sp.first == i) end = std::max(end, sp.last);
    }
    if (end >= 0) {
      end = std::min(end, n - 1);
      out.push_back({"", "", true, i, end});
      i = end + 1;
    } else {
      const auto& t = s.tokens[static_cast<std::size_t>(i)];
      out.push_back({lower_of(t.surface), upper_of(t.pos), false, i, i});
      ++i;
    }
  }
  return out;
}

inline bool element_accepts(const PatternElement& e, const ScanToken& t, const Lexicon& lex) {
  if (e.kind == PatternElement::Kind::CitationSlot) return t.citation;
  if (t.citation) return false;
  switch (e.kind) {
    case PatternElement::Kind::Literal: return e.value == t.lower;
    case PatternElement::Kind::PosWildcard:
      return t.pos.size() >= e.value.size() && t.pos.compare(0, e.value.size(), e.value) == 0;
    case PatternElement::Kind::Category: {
      const auto* cat = lex.find(e.value);
      if (!cat || !cat->surfaces.count(t.lower)) return false;
      if (!cat->pos_filter) return true;
      const auto& f = *cat->pos_filter;
      return t.pos.size() >= f.size() && upper_of(t.pos.substr(0, f.size())) == upper_of(f);
    }
    default: return false;
  }
}

/// Every (pattern, span) hit of `patterns` in one sentence, for one scope.
inline std::vector<PatternMatch> naive_scan(const PatternSet& patterns, const std::vector<ScanToken>& toks,
                                            Scope scope, int offset) {
  std::vector<PatternMatch> out;
  const auto& pats = patterns.patterns();
  for (std::size_t id = 0; id < pats.size(); ++id) {
    const auto& p = pats[id];
    if (p.scope != scope) continue;
    // Duplicates report under their first occurrence.
    bool duplicate = false;
    for (std::size_t j = 0; j < id; ++j) {
      if (pats[j].elements == p.elements && pats[j].scope == p.scope && pats[j].function == p.function) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    const std::size_t len = p.elements.size();
    for (std::size_t start = 0; start + len <= toks.size(); ++start) {
      bool ok = true;
      for (std::size_t k = 0; k < len && ok; ++k) ok = element_accepts(p.elements[k], toks[start + k], patterns.lexicon());
      if (ok) out.push_back({id, scope, offset, {toks[start].first, toks[start + len - 1].last}});
    }
  }
  return out;
}

inline void sort_matches(std::vector<PatternMatch>& v) {
  std::sort(v.begin(), v.end(), [](const PatternMatch& a, const PatternMatch& b) {
    return std::tie(a.sentence_offset, a.span.first, a.span.last, a.pattern_id) <
           std::tie(b.sentence_offset, b.span.first, b.span.last, b.pattern_id);
  });
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& random_vocab() {
  static const std::vector<std::string> v = {"we", "use", "the", "corpus", "of", "work", "our", "previous",
                                             "similar", "to", "extend", "method", "data", "this", "Model",
                                             "Parser", "by", "a", "results", "follow"};
  return v;
}

inline const std::vector<std::string>& random_tags() {
  static const std::vector<std::string> v = {"NN", "NNS", "NNP", "VB", "VBD", "VBZ", "DT", "IN", "JJ", "PRP", "PRP$", "RB"};
  return v;
}

inline Lexicon random_lexicon(Rng& rng) {
  Lexicon lex;
  const char* names[] = {"USE", "WORK_NOUN", "SIMILAR_ADJ", "BEFORE_ADJ", "CHANGE_NOUN"};
  for (const char* name : names) {
    LexiconCategory c;
    c.name = name;
    const std::size_t n = 2 + rng.uniform_index(4);
    for (std::size_t i = 0; i < n; ++i) c.surfaces.insert(lower_of(random_vocab()[rng.uniform_index(random_vocab().size())]));
    if (rng.uniform_index(3) == 0) c.pos_filter = random_tags()[rng.uniform_index(random_tags().size())].substr(0, 1 + rng.uniform_index(2));
    lex.add(std::move(c));
  }
  return lex;
}

inline Pattern random_pattern(Rng& rng, const Lexicon& lex) {
  Pattern p;
  const std::size_t len = 1 + rng.uniform_index(4);
  std::vector<std::string> cats;
  for (const auto& [name, c] : lex.categories()) cats.push_back(name);
  for (std::size_t i = 0; i < len; ++i) {
    switch (rng.uniform_index(8)) {
      case 0:
      case 1: p.elements.push_back(PatternElement::category(cats[rng.uniform_index(cats.size())])); break;
      case 2:
      case 3: {
        const auto& tag = random_tags()[rng.uniform_index(random_tags().size())];
        p.elements.push_back(PatternElement::wildcard(tag.substr(0, 1 + rng.uniform_index(tag.size()))));
        break;
      }
      case 4: p.elements.push_back(PatternElement::citation()); break;
      default: p.elements.push_back(PatternElement::literal(random_vocab()[rng.uniform_index(random_vocab().size())]));
    }
  }
  p.scope = static_cast<Scope>(rng.uniform_index(kScopeCount));
  p.function = static_cast<Function>(rng.uniform_index(kFunctionCount));
  return p;
}

struct RandomSentence {
  Sentence sentence;
  std::vector<TokenSpan> mentions;
};

inline RandomSentence random_sentence(Rng& rng) {
  RandomSentence out;
  const std::size_t n = 3 + rng.uniform_index(14);
  for (std::size_t i = 0; i < n; ++i) {
    Token t;
    t.surface = random_vocab()[rng.uniform_index(random_vocab().size())];
    t.pos = random_tags()[rng.uniform_index(random_tags().size())];
    t.char_start = i * 10;
    t.char_end = i * 10 + t.surface.size();
    out.sentence.tokens.push_back(t);
  }
  int pos = 0;
  while (pos < static_cast<int>(n)) {
    if (rng.uniform_index(6) == 0) {
      const int len = 1 + static_cast<int>(rng.uniform_index(3));
      const int last = std::min(pos + len - 1, static_cast<int>(n) - 1);
      out.mentions.push_back({pos, last});
      pos = last + 1;
    } else {
      ++pos;
    }
  }
  return out;
}

}  // namespace oracle
