#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/patternlang.hpp"

namespace citescope {

class BootstrapError : public std::runtime_error {
 public:
  enum class Kind { NoLabeledData, InvalidConfig };
  BootstrapError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct BootstrapConfig {
  std::size_t min_len = 3;
  std::size_t max_len = 8;
  std::size_t max_wildcards = 2;
  std::array<std::size_t, kFunctionCount> min_support = default_min_support();
  double purity_threshold = 0.51;

  static std::array<std::size_t, kFunctionCount> default_min_support();
  /// Throws BootstrapError(InvalidConfig).
  void validate() const;
};

struct CandidateStats {
  Pattern pattern;
  std::array<std::size_t, kFunctionCount> counts{};

  std::size_t total() const;
};

/// The function a candidate is kept for, if any. Kept for f when f holds more
/// than `purity_threshold` of the occurrences and the candidate occurs in at
/// least min_support[f] contexts overall.
std::optional<Function> keep_decision(const CandidateStats& stats, const BootstrapConfig& cfg);

/// Lazily yields every generalized window of the scope sentences of a context.
/// Each window position becomes its literal, its first category, or a POS
/// wildcard; a collapsed mention becomes the citation slot.
class CandidateEnumerator {
 public:
  CandidateEnumerator(const CitationContext& ctx, Scope scope, const Lexicon& lexicon, const BootstrapConfig& cfg);
  /// Same, over a single already-collapsed sentence.
  CandidateEnumerator(std::vector<MatchToken> tokens, Scope scope, const Lexicon& lexicon, const BootstrapConfig& cfg);

  std::optional<Pattern> next();

 private:
  struct Option {
    PatternElement element;
    bool wildcard;
  };
  void load_sentence();
  bool advance_window();

  const Lexicon* lexicon_;
  BootstrapConfig cfg_;
  Scope scope_;
  std::vector<std::vector<MatchToken>> sentences_;
  std::size_t sentence_ = 0;
  std::vector<std::vector<Option>> options_;  // per token of the current sentence
  std::size_t start_ = 0;
  std::size_t len_ = 0;
  std::vector<std::size_t> digits_;
  bool fresh_window_ = false;
};

/// Per-token generalization options in enumeration order.
std::vector<PatternElement> generalizations(const MatchToken& tok, const Lexicon& lexicon);

struct InductionResult {
  PatternSet patterns;
  std::vector<CandidateStats> stats;  // parallel to patterns
};

/// Single induction pass over gold-labelled contexts for the given scopes.
/// Throws BootstrapError(NoLabeledData).
InductionResult induce(const std::vector<CitationContext>& labeled, const Lexicon& lexicon,
                       const BootstrapConfig& cfg = {},
                       const std::vector<Scope>& scopes = {Scope::Preceding, Scope::Citing, Scope::Following});

/// "scope,pattern,function,support,purity" rows.
std::string stats_csv(const InductionResult& result);

}  // namespace citescope
