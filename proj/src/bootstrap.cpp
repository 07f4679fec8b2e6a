#include "citescope/bootstrap.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include "citescope/log.hpp"
#include "citescope/util.hpp"

namespace citescope {

std::array<std::size_t, kFunctionCount> BootstrapConfig::default_min_support() {
  std::array<std::size_t, kFunctionCount> s{};
  s.fill(5);
  s[index_of(Function::Background)] = 100;
  return s;
}

void BootstrapConfig::validate() const {
  auto bad = [](const std::string& m) { throw BootstrapError(BootstrapError::Kind::InvalidConfig, m); };
  if (min_len < 1 || min_len > max_len) bad("bootstrap window lengths must satisfy 1 <= min_len <= max_len");
  for (auto s : min_support) {
    if (s < 1) bad("bootstrap min_support must be >= 1");
  }
  if (!(purity_threshold > 0.5 && purity_threshold <= 1.0)) bad("bootstrap purity_threshold must lie in (0.5, 1]");
}

std::size_t CandidateStats::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::optional<Function> keep_decision(const CandidateStats& stats, const BootstrapConfig& cfg) {
  const std::size_t total = stats.total();
  if (total == 0) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t f = 1; f < kFunctionCount; ++f) {
    if (stats.counts[f] > stats.counts[best]) best = f;
  }
  const double purity = static_cast<double>(stats.counts[best]) / static_cast<double>(total);
  if (purity > cfg.purity_threshold && total >= cfg.min_support[best]) return kAllFunctions[best];
  return std::nullopt;
}

namespace {

bool usable_literal(const std::string& s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::vector<MatchToken>> scope_views(const CitationContext& ctx, Scope scope) {
  std::vector<std::vector<MatchToken>> out;
  for (int off = -kWindowBefore; off <= kWindowAfter; ++off) {
    if (scope_covers(scope, off) && ctx.at(off)) out.push_back(match_view(ctx, off));
  }
  return out;
}

}  // namespace

std::vector<PatternElement> generalizations(const MatchToken& tok, const Lexicon& lexicon) {
  if (tok.citation) return {PatternElement::citation()};
  std::vector<PatternElement> out;
  if (usable_literal(tok.lower)) out.push_back(PatternElement::literal(tok.lower));
  const auto cats = lexicon.categories_for(tok.lower, tok.pos);
  if (!cats.empty()) out.push_back(PatternElement::category(cats.front()->name));
  if (!tok.pos.empty() && std::isalpha(static_cast<unsigned char>(tok.pos.front()))) {
    out.push_back(PatternElement::wildcard(tok.pos.substr(0, 1)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CandidateEnumerator
// ---------------------------------------------------------------------------

CandidateEnumerator::CandidateEnumerator(const CitationContext& ctx, Scope scope, const Lexicon& lexicon,
                                         const BootstrapConfig& cfg)
    : lexicon_(&lexicon), cfg_(cfg), scope_(scope), sentences_(scope_views(ctx, scope)) {
  load_sentence();
}

CandidateEnumerator::CandidateEnumerator(std::vector<MatchToken> tokens, Scope scope, const Lexicon& lexicon,
                                         const BootstrapConfig& cfg)
    : lexicon_(&lexicon), cfg_(cfg), scope_(scope) {
  sentences_.push_back(std::move(tokens));
  load_sentence();
}

void CandidateEnumerator::load_sentence() {
  options_.clear();
  start_ = 0;
  len_ = 0;
  fresh_window_ = false;
  if (sentence_ >= sentences_.size()) return;
  for (const auto& tok : sentences_[sentence_]) {
    std::vector<Option> opts;
    for (auto& e : generalizations(tok, *lexicon_)) {
      const bool wild = e.kind == PatternElement::Kind::PosWildcard;
      opts.push_back({std::move(e), wild});
    }
    options_.push_back(std::move(opts));
  }
}

// Moves to the next (start, length) window of the current or a later sentence.
bool CandidateEnumerator::advance_window() {
  while (sentence_ < sentences_.size()) {
    const std::size_t n = options_.size();
    if (len_ == 0) {
      len_ = cfg_.min_len;
    } else if (len_ < cfg_.max_len && start_ + len_ + 1 <= n) {
      ++len_;
    } else {
      ++start_;
      len_ = cfg_.min_len;
    }
    if (start_ + len_ <= n) {
      bool any_empty = false;
      for (std::size_t k = 0; k < len_; ++k) any_empty = any_empty || options_[start_ + k].empty();
      if (any_empty) continue;
      digits_.assign(len_, 0);
      fresh_window_ = true;
      return true;
    }
    ++sentence_;
    load_sentence();
  }
  return false;
}

std::optional<Pattern> CandidateEnumerator::next() {
  for (;;) {
    if (fresh_window_) {
      fresh_window_ = false;
    } else {
      // Mixed-radix increment over the window's option lists.
      bool overflow = true;
      for (std::size_t k = len_; k-- > 0;) {
        if (++digits_[k] < options_[start_ + k].size()) {
          overflow = false;
          break;
        }
        digits_[k] = 0;
      }
      if (overflow) {
        if (!advance_window()) return std::nullopt;
        fresh_window_ = false;
      }
    }
    std::size_t wild = 0;
    for (std::size_t k = 0; k < len_; ++k) wild += options_[start_ + k][digits_[k]].wildcard ? 1 : 0;
    if (wild > cfg_.max_wildcards) continue;
    Pattern p;
    p.scope = scope_;
    p.provenance = Provenance::Bootstrapped;
    p.elements.reserve(len_);
    for (std::size_t k = 0; k < len_; ++k) p.elements.push_back(options_[start_ + k][digits_[k]].element);
    return p;
  }
}

// ---------------------------------------------------------------------------
// induce
// ---------------------------------------------------------------------------

namespace {

using Key = std::vector<int>;  // scope, then element symbols

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    Fnv1a h;
    for (int v : k) h.add(static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)));
    return static_cast<std::size_t>(h.value());
  }
};

using KeySet = std::unordered_set<Key, KeyHash>;
using Counts = std::array<std::size_t, kFunctionCount>;

struct SymbolTable {
  std::unordered_map<std::string, int> ids;
  std::vector<PatternElement> elements;
  std::vector<bool> wildcard;

  int intern(const PatternElement& e) {
    // Element text is unambiguous per kind, so it doubles as the key.
    auto [it, inserted] = ids.try_emplace(e.text(), static_cast<int>(elements.size()));
    if (inserted) {
      elements.push_back(e);
      wildcard.push_back(e.kind == PatternElement::Kind::PosWildcard);
    }
    return it->second;
  }
};

// One labelled context reduced to symbol options per token, per scope sentence.
struct PreparedContext {
  std::size_t label;
  std::array<std::vector<std::vector<std::vector<int>>>, kScopeCount> sentences;
};

class LevelMiner {
 public:
  LevelMiner(const SymbolTable& symbols, const BootstrapConfig& cfg, std::size_t frequent_floor)
      : symbols_(symbols), cfg_(cfg), floor_(frequent_floor), frequent_(cfg.max_len + 1) {}

  // Counts all length-`len` candidates whose shorter prefixes survived earlier levels.
  std::unordered_map<Key, Counts, KeyHash> count_level(const std::vector<PreparedContext>& contexts,
                                                       const std::vector<Scope>& scopes, std::size_t len) {
    std::unordered_map<Key, Counts, KeyHash> counts;
    std::vector<Key> found;
    Key seq;
    for (const auto& pc : contexts) {
      for (Scope scope : scopes) {
        found.clear();
        const auto scope_id = static_cast<int>(scope);
        for (const auto& sentence : pc.sentences[static_cast<std::size_t>(scope)]) {
          for (std::size_t start = 0; start + len <= sentence.size(); ++start) {
            seq.assign(1, scope_id);
            extend(sentence, start, len, 0, seq, found);
          }
        }
        std::sort(found.begin(), found.end());
        found.erase(std::unique(found.begin(), found.end()), found.end());
        for (auto& k : found) counts[k][pc.label] += 1;
      }
    }
    return counts;
  }

  void keep_frequent(std::size_t len, const std::unordered_map<Key, Counts, KeyHash>& counts) {
    for (const auto& [k, c] : counts) {
      std::size_t t = 0;
      for (auto v : c) t += v;
      if (t >= floor_) frequent_[len].insert(k);
    }
  }

  bool level_empty(std::size_t len) const { return frequent_[len].empty(); }

 private:
  void extend(const std::vector<std::vector<int>>& sentence, std::size_t start, std::size_t len,
              std::size_t wild, Key& seq, std::vector<Key>& found) const {
    const std::size_t depth = seq.size() - 1;
    if (depth >= cfg_.min_len && depth < len && !frequent_[depth].count(seq)) return;
    if (depth == len) {
      found.push_back(seq);
      return;
    }
    for (int sym : sentence[start + depth]) {
      const std::size_t w = wild + (symbols_.wildcard[static_cast<std::size_t>(sym)] ? 1 : 0);
      if (w > cfg_.max_wildcards) continue;
      seq.push_back(sym);
      extend(sentence, start, len, w, seq, found);
      seq.pop_back();
    }
  }

  const SymbolTable& symbols_;
  const BootstrapConfig& cfg_;
  std::size_t floor_;
  std::vector<KeySet> frequent_;
};

}  // namespace

InductionResult induce(const std::vector<CitationContext>& labeled, const Lexicon& lexicon,
                       const BootstrapConfig& cfg, const std::vector<Scope>& scopes) {
  cfg.validate();
  SymbolTable symbols;
  std::vector<PreparedContext> contexts;
  for (const auto& ctx : labeled) {
    const auto& gold = ctx.mention().gold;
    if (!gold) continue;
    PreparedContext pc;
    pc.label = index_of(gold->function);
    for (Scope scope : scopes) {
      for (const auto& view : scope_views(ctx, scope)) {
        std::vector<std::vector<int>> sentence;
        sentence.reserve(view.size());
        for (const auto& tok : view) {
          std::vector<int> opts;
          for (const auto& e : generalizations(tok, lexicon)) opts.push_back(symbols.intern(e));
          sentence.push_back(std::move(opts));
        }
        pc.sentences[static_cast<std::size_t>(scope)].push_back(std::move(sentence));
      }
    }
    contexts.push_back(std::move(pc));
  }
  if (contexts.empty()) throw BootstrapError(BootstrapError::Kind::NoLabeledData, "no gold-labelled contexts to induce from");

  // Occurring in a context implies every prefix occurs there too, so a prefix
  // below the smallest support floor can never grow into a kept pattern.
  const std::size_t floor = *std::min_element(cfg.min_support.begin(), cfg.min_support.end());
  LevelMiner miner(symbols, cfg, floor);
  std::vector<CandidateStats> kept;
  for (std::size_t len = cfg.min_len; len <= cfg.max_len; ++len) {
    auto counts = miner.count_level(contexts, scopes, len);
    for (const auto& [k, c] : counts) {
      CandidateStats st;
      st.counts = c;
      const auto f = keep_decision(st, cfg);
      if (!f) continue;
      st.pattern.scope = static_cast<Scope>(k[0]);
      st.pattern.function = *f;
      st.pattern.provenance = Provenance::Bootstrapped;
      for (std::size_t i = 1; i < k.size(); ++i) st.pattern.elements.push_back(symbols.elements[static_cast<std::size_t>(k[i])]);
      kept.push_back(std::move(st));
    }
    miner.keep_frequent(len, counts);
    if (miner.level_empty(len)) break;
  }

  struct Sortable {
    std::size_t function;
    std::size_t support;
    std::string text;
    int scope;
    std::size_t idx;
  };
  std::vector<Sortable> order;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto f = index_of(kept[i].pattern.function);
    order.push_back({f, kept[i].counts[f], kept[i].pattern.text(), static_cast<int>(kept[i].pattern.scope), i});
  }
  std::sort(order.begin(), order.end(), [](const Sortable& a, const Sortable& b) {
    if (a.function != b.function) return a.function < b.function;
    if (a.support != b.support) return a.support > b.support;
    if (a.text != b.text) return a.text < b.text;
    return a.scope < b.scope;
  });

  InductionResult result{PatternSet(lexicon), {}};
  for (const auto& o : order) {
    auto& st = kept[o.idx];
    if (st.pattern.elements.size() < cfg.min_len || st.pattern.elements.size() > cfg.max_len ||
        st.pattern.wildcard_count() > cfg.max_wildcards) {
      throw std::logic_error("bootstrap emitted a pattern outside its length or wildcard bounds");
    }
    result.patterns.add(st.pattern);
    result.stats.push_back(std::move(st));
  }
  log::info("bootstrap", "induced " + std::to_string(result.patterns.size()) + " patterns from " +
                             std::to_string(contexts.size()) + " contexts");
  return result;
}

std::string stats_csv(const InductionResult& result) {
  std::string out = "scope,pattern,function,support,purity\n";
  for (const auto& st : result.stats) {
    const auto f = index_of(st.pattern.function);
    std::string text = st.pattern.text();
    std::string quoted = "\"";
    for (char c : text) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    out += std::string(to_string(st.pattern.scope)) + ',' + quoted + ',' + std::string(to_string(st.pattern.function)) +
           ',' + std::to_string(st.counts[f]) + ',' +
           format_double(static_cast<double>(st.counts[f]) / static_cast<double>(st.total())) + '\n';
  }
  return out;
}

}  // namespace citescope
