#include "citescope/patternlang.hpp"

#include <algorithm>
#include <sstream>

#include "citescope/util.hpp"

namespace citescope {

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

bool LexiconCategory::accepts(std::string_view lower_surface, std::string_view pos) const {
  if (pos_filter && !starts_with_ci(pos, *pos_filter)) return false;
  return surfaces.find(std::string(lower_surface)) != surfaces.end();
}

void Lexicon::add(LexiconCategory category) {
  category.name = to_upper(category.name);
  if (category.surfaces.empty()) {
    throw PatternError(PatternError::Kind::EmptyCategory, "category '" + category.name + "' has no surfaces");
  }
  if (by_name_.contains(category.name)) {
    throw PatternError(PatternError::Kind::DuplicateCategory, "duplicate category '" + category.name + "'");
  }
  for (const auto& s : category.surfaces) {
    auto& names = by_surface_[s];
    names.insert(std::upper_bound(names.begin(), names.end(), category.name), category.name);
  }
  auto name = category.name;
  by_name_.emplace(std::move(name), std::move(category));
}

const LexiconCategory* Lexicon::find(std::string_view name) const {
  const auto it = by_name_.find(to_upper(name));
  return it == by_name_.end() ? nullptr : &it->second;
}

std::vector<const LexiconCategory*> Lexicon::categories_for(std::string_view lower_surface,
                                                            std::string_view pos) const {
  std::vector<const LexiconCategory*> out;
  const auto it = by_surface_.find(std::string(lower_surface));
  if (it == by_surface_.end()) return out;
  for (const auto& name : it->second) {
    const auto& cat = by_name_.find(name)->second;
    if (cat.accepts(lower_surface, pos)) out.push_back(&cat);
  }
  return out;
}

std::string Lexicon::serialize() const {
  std::string out;
  for (const auto& [name, cat] : by_name_) {
    out += name;
    if (cat.pos_filter) out += ":" + *cat.pos_filter;
    out += '\n';
    for (const auto& s : cat.surfaces) out += "  " + s + "\n";
  }
  return out;
}

std::uint64_t Lexicon::version_hash() const { return fnv1a(serialize()); }

Lexicon parse_lexicon(std::string_view text) {
  Lexicon lex;
  std::optional<LexiconCategory> current;
  auto flush = [&] {
    if (current) lex.add(std::move(*current));
    current.reset();
  };
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const bool indented = line.front() == ' ' || line.front() == '\t';
    if (!indented) {
      if (line.front() == '#') continue;
      flush();
      LexiconCategory cat;
      const auto header = std::string(trim(line));
      const auto colon = header.find(':');
      cat.name = to_upper(header.substr(0, colon));
      if (colon != std::string::npos) cat.pos_filter = to_upper(header.substr(colon + 1));
      if (cat.name.empty()) {
        throw PatternError(PatternError::Kind::Malformed, "empty category name at line " + std::to_string(line_no));
      }
      current = std::move(cat);
    } else {
      if (!current) {
        throw PatternError(PatternError::Kind::Malformed,
                           "surface before any category header at line " + std::to_string(line_no));
      }
      current->surfaces.insert(to_lower(trim(line)));
    }
  }
  flush();
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) { return parse_lexicon(read_file(path)); }

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

PatternElement PatternElement::literal(std::string_view w) { return {Kind::Literal, to_lower(w)}; }
PatternElement PatternElement::category(std::string_view name) { return {Kind::Category, to_upper(name)}; }
PatternElement PatternElement::wildcard(std::string_view pos_prefix) {
  return {Kind::PosWildcard, to_upper(pos_prefix)};
}
PatternElement PatternElement::citation() { return {Kind::CitationSlot, ""}; }

std::string PatternElement::text() const {
  switch (kind) {
    case Kind::Literal:
      // Backslash keeps literals that look like markup from being reparsed as such.
      if (value == "citation" || (!value.empty() && (value.front() == '@' || value.front() == '#' || value.front() == '\\'))) {
        return "\\" + value;
      }
      return value;
    case Kind::Category: return "@" + value;
    case Kind::PosWildcard: return "#" + value;
    case Kind::CitationSlot: return "citation";
  }
  return value;
}

std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::Preceding: return "Preceding";
    case Scope::Citing: return "Citing";
    case Scope::Following: return "Following";
  }
  return "?";
}

std::optional<Scope> parse_scope(std::string_view s) {
  for (auto scope : {Scope::Preceding, Scope::Citing, Scope::Following}) {
    if (to_string(scope) == s) return scope;
  }
  return std::nullopt;
}

bool scope_covers(Scope s, int offset) {
  switch (s) {
    case Scope::Preceding: return offset == -1;
    case Scope::Citing: return offset == 0;
    case Scope::Following: return offset >= 1 && offset <= kWindowAfter;
  }
  return false;
}

std::string_view to_string(Provenance p) { return p == Provenance::Curated ? "curated" : "bootstrapped"; }

std::string Pattern::text() const {
  std::string out;
  for (const auto& e : elements) {
    if (!out.empty()) out += ' ';
    out += e.text();
  }
  return out;
}

std::size_t Pattern::wildcard_count() const {
  return static_cast<std::size_t>(std::count_if(elements.begin(), elements.end(), [](const auto& e) {
    return e.kind == PatternElement::Kind::PosWildcard;
  }));
}

Pattern parse_pattern(std::string_view text, const Lexicon& lexicon, Scope scope, Function function,
                      Provenance provenance) {
  Pattern p;
  p.scope = scope;
  p.function = function;
  p.provenance = provenance;
  for (const auto& tok : split_ws(text)) {
    if (tok.size() > 1 && tok.front() == '\\') {
      p.elements.push_back(PatternElement::literal(tok.substr(1)));
    } else if (tok.size() > 1 && tok.front() == '@') {
      auto name = tok.substr(1);
      if (!lexicon.find(name)) {
        throw PatternError(PatternError::Kind::UnknownCategory, "unknown category '" + name + "'");
      }
      p.elements.push_back(PatternElement::category(name));
    } else if (tok.size() > 1 && tok.front() == '#') {
      p.elements.push_back(PatternElement::wildcard(tok.substr(1)));
    } else if (tok == "citation") {
      p.elements.push_back(PatternElement::citation());
    } else {
      p.elements.push_back(PatternElement::literal(tok));
    }
  }
  if (p.elements.empty()) throw PatternError(PatternError::Kind::EmptyPattern, "empty pattern");
  return p;
}

void PatternSet::add(Pattern pattern) {
  if (pattern.elements.empty()) throw PatternError(PatternError::Kind::EmptyPattern, "empty pattern");
  for (const auto& e : pattern.elements) {
    if (e.kind == PatternElement::Kind::Category && !lexicon_.find(e.value)) {
      throw PatternError(PatternError::Kind::UnknownCategory, "unknown category '" + e.value + "'");
    }
  }
  patterns_.push_back(std::move(pattern));
}

void PatternSet::append(const PatternSet& other) {
  for (const auto& p : other.patterns()) add(p);
}

std::string PatternSet::serialize() const {
  std::string out;
  for (const auto& p : patterns_) {
    out += to_string(p.scope);
    out += '\t';
    out += to_string(p.function);
    out += '\t';
    out += p.text();
    out += '\t';
    out += to_string(p.provenance);
    out += '\n';
  }
  return out;
}

std::uint64_t PatternSet::version_hash() const {
  Fnv1a h;
  h.add(lexicon_.serialize());
  h.add(serialize());
  return h.value();
}

PatternSet parse_pattern_file(std::string_view text, const Lexicon& lexicon) {
  PatternSet set(lexicon);
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    const auto where = " at line " + std::to_string(line_no);
    if (cols.size() < 3 || cols.size() > 4) {
      throw PatternError(PatternError::Kind::Malformed, "expected scope<TAB>function<TAB>pattern" + where);
    }
    const auto scope = parse_scope(trim(cols[0]));
    const auto function = parse_function(trim(cols[1]));
    if (!scope) throw PatternError(PatternError::Kind::Malformed, "unknown scope '" + cols[0] + "'" + where);
    if (!function) {
      throw PatternError(PatternError::Kind::Malformed, "unknown function '" + cols[1] + "'" + where);
    }
    Provenance prov = Provenance::Curated;
    if (cols.size() == 4) {
      const auto p = trim(cols[3]);
      if (p == "bootstrapped") {
        prov = Provenance::Bootstrapped;
      } else if (p != "curated") {
        throw PatternError(PatternError::Kind::Malformed, "unknown provenance '" + cols[3] + "'" + where);
      }
    }
    set.add(parse_pattern(cols[2], lexicon, *scope, *function, prov));
  }
  return set;
}

PatternSet load_patterns(const std::filesystem::path& path, const Lexicon& lexicon) {
  return parse_pattern_file(read_file(path), lexicon);
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

std::vector<MatchToken> match_view(const Sentence& sentence, const std::vector<TokenSpan>& mention_spans) {
  std::vector<MatchToken> out;
  out.reserve(sentence.tokens.size());
  const int n = static_cast<int>(sentence.tokens.size());
  int i = 0;
  while (i < n) {
    const TokenSpan* span = nullptr;
    for (const auto& s : mention_spans) {
      if (s.first == i) {
        // Overlapping spans merge into the widest one starting here.
        if (!span || s.last > span->last) span = &s;
      }
    }
    if (span) {
      MatchToken t;
      t.citation = true;
      t.source = {i, std::min(span->last, n - 1)};
      i = t.source.last + 1;
      out.push_back(std::move(t));
      continue;
    }
    const auto& tok = sentence.tokens[static_cast<std::size_t>(i)];
    MatchToken t;
    t.lower = to_lower(tok.surface);
    t.pos = to_upper(tok.pos);
    t.source = {i, i};
    out.push_back(std::move(t));
    ++i;
  }
  return out;
}

std::vector<MatchToken> match_view(const CitationContext& ctx, int offset) {
  const Sentence* s = ctx.at(offset);
  if (!s) return {};
  const auto& m = ctx.mention();
  std::vector<TokenSpan> spans;
  for (std::size_t idx : ctx.paper->mentions_in(m.section_index, m.sentence_index + offset)) {
    spans.push_back(ctx.paper->mentions[idx].span);
  }
  return match_view(*s, spans);
}

int Matcher::Node::child(int symbol) const {
  const auto it = std::lower_bound(children.begin(), children.end(), std::pair{symbol, -1});
  if (it == children.end() || it->first != symbol) return -1;
  return it->second;
}

Matcher::Matcher(const PatternSet& patterns)
    : pattern_count_(patterns.size()), version_hash_(patterns.version_hash()) {
  nodes_.emplace_back();
  nodes_.emplace_back();
  nodes_.emplace_back();
  roots_ = {0, 1, 2};

  int next_symbol = 0;
  auto intern = [&](std::unordered_map<std::string, int>& table, const std::string& key) {
    const auto [it, inserted] = table.emplace(key, next_symbol);
    if (inserted) ++next_symbol;
    return it->second;
  };

  const auto& pats = patterns.patterns();
  canonical_.resize(pats.size());
  for (std::size_t id = 0; id < pats.size(); ++id) {
    const auto& p = pats[id];
    int node = roots_[static_cast<std::size_t>(p.scope)];
    for (const auto& e : p.elements) {
      int sym = -1;
      switch (e.kind) {
        case PatternElement::Kind::Literal: sym = intern(literal_ids_, e.value); break;
        case PatternElement::Kind::Category: {
          const bool fresh = !category_ids_.contains(e.value);
          sym = intern(category_ids_, e.value);
          if (fresh) used_categories_.emplace_back(sym, *patterns.lexicon().find(e.value));
          break;
        }
        case PatternElement::Kind::PosWildcard:
          sym = intern(wildcard_ids_, e.value);
          max_wildcard_len_ = std::max(max_wildcard_len_, e.value.size());
          break;
        case PatternElement::Kind::CitationSlot:
          if (citation_id_ < 0) citation_id_ = next_symbol++;
          sym = citation_id_;
          break;
      }
      int next = nodes_[static_cast<std::size_t>(node)].child(sym);
      if (next < 0) {
        next = static_cast<int>(nodes_.size());
        auto& children = nodes_[static_cast<std::size_t>(node)].children;
        children.insert(std::lower_bound(children.begin(), children.end(), std::pair{sym, -1}),
                        std::pair{sym, next});
        nodes_.emplace_back();
      }
      node = next;
    }
    auto& terminals = nodes_[static_cast<std::size_t>(node)].terminals;
    const auto dup = std::find_if(terminals.begin(), terminals.end(),
                                  [&](std::size_t other) { return pats[other].function == p.function; });
    if (dup != terminals.end()) {
      canonical_[id] = *dup;
    } else {
      canonical_[id] = id;
      terminals.push_back(id);
    }
  }
}

void Matcher::symbols_for(const MatchToken& tok, std::vector<int>& out) const {
  out.clear();
  if (tok.citation) {
    if (citation_id_ >= 0) out.push_back(citation_id_);
    return;
  }
  if (const auto it = literal_ids_.find(tok.lower); it != literal_ids_.end()) out.push_back(it->second);
  for (const auto& [sym, cat] : used_categories_) {
    if (cat.accepts(tok.lower, tok.pos)) out.push_back(sym);
  }
  const std::size_t max_len = std::min(max_wildcard_len_, tok.pos.size());
  for (std::size_t len = 1; len <= max_len; ++len) {
    if (const auto it = wildcard_ids_.find(tok.pos.substr(0, len)); it != wildcard_ids_.end()) {
      out.push_back(it->second);
    }
  }
}

void Matcher::match_tokens(const std::vector<MatchToken>& tokens, Scope scope, int offset,
                           std::vector<PatternMatch>& out) const {
  if (pattern_count_ == 0 || tokens.empty()) return;
  std::vector<std::vector<int>> symbols(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) symbols_for(tokens[i], symbols[i]);

  struct Frame {
    int node;
    std::size_t pos;
  };
  std::vector<Frame> stack;
  const int root = roots_[static_cast<std::size_t>(scope)];
  for (std::size_t start = 0; start < tokens.size(); ++start) {
    stack.push_back({root, start});
    while (!stack.empty()) {
      const Frame f = stack.back();
      stack.pop_back();
      if (f.pos >= tokens.size()) continue;
      const auto& node = nodes_[static_cast<std::size_t>(f.node)];
      for (int sym : symbols[f.pos]) {
        const int next = node.child(sym);
        if (next < 0) continue;
        for (std::size_t id : nodes_[static_cast<std::size_t>(next)].terminals) {
          out.push_back({id, scope, offset, {tokens[start].source.first, tokens[f.pos].source.last}});
        }
        if (!nodes_[static_cast<std::size_t>(next)].children.empty()) stack.push_back({next, f.pos + 1});
      }
    }
  }
}

std::vector<PatternMatch> Matcher::match_context(const CitationContext& ctx) const {
  std::vector<PatternMatch> out;
  if (pattern_count_ == 0) return out;
  for (int offset = -kWindowBefore; offset <= kWindowAfter; ++offset) {
    if (!ctx.at(offset)) continue;
    const auto view = match_view(ctx, offset);
    for (auto scope : {Scope::Preceding, Scope::Citing, Scope::Following}) {
      if (scope_covers(scope, offset)) match_tokens(view, scope, offset, out);
    }
  }
  std::sort(out.begin(), out.end(), [](const PatternMatch& a, const PatternMatch& b) {
    return std::tie(a.sentence_offset, a.span.first, a.span.last, a.pattern_id) <
           std::tie(b.sentence_offset, b.span.first, b.span.last, b.pattern_id);
  });
  return out;
}

Matcher compile(const PatternSet& patterns) { return Matcher(patterns); }

std::vector<PatternMatch> match_context(const Matcher& matcher, const CitationContext& ctx) {
  return matcher.match_context(ctx);
}

}  // namespace citescope
