#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace citescope {

/// Discourse purpose of a citation. The declaration order is the class order
/// used for tie-breaking throughout the toolkit.
enum class Function {
  Background,
  Motivation,
  Uses,
  Extends,
  Continuation,
  CompareContrast,
  Future,
};
inline constexpr std::size_t kFunctionCount = 7;
inline constexpr std::array<Function, kFunctionCount> kAllFunctions = {
    Function::Background, Function::Motivation,      Function::Uses,  Function::Extends,
    Function::Continuation, Function::CompareContrast, Function::Future};

enum class Centrality { Essential, Positioning };
inline constexpr std::size_t kCentralityCount = 2;
inline constexpr std::array<Centrality, kCentralityCount> kAllCentralities = {
    Centrality::Essential, Centrality::Positioning};

struct Label {
  Function function = Function::Background;
  Centrality centrality = Centrality::Positioning;

  friend bool operator==(const Label&, const Label&) = default;
};

enum class SectionKind {
  Introduction,
  Motivation,
  RelatedWork,
  Methodology,
  Evaluation,
  Results,
  Discussion,
  Conclusion,
  Other,
};
inline constexpr std::size_t kSectionKindCount = 9;
inline constexpr std::array<SectionKind, kSectionKindCount> kAllSectionKinds = {
    SectionKind::Introduction, SectionKind::Motivation, SectionKind::RelatedWork,
    SectionKind::Methodology,  SectionKind::Evaluation, SectionKind::Results,
    SectionKind::Discussion,   SectionKind::Conclusion, SectionKind::Other};

enum class VenueKind { Journal, Conference, Workshop };
inline constexpr std::size_t kVenueKindCount = 3;
inline constexpr std::array<VenueKind, kVenueKindCount> kAllVenueKinds = {
    VenueKind::Journal, VenueKind::Conference, VenueKind::Workshop};

enum class CitationForm { Nominative, Parenthetical };

std::string_view to_string(Function f);
std::string_view to_string(Centrality c);
std::string_view to_string(SectionKind k);
std::string_view to_string(VenueKind v);
std::string_view to_string(CitationForm f);

// Parsers accept exactly the spellings produced by to_string.
std::optional<Function> parse_function(std::string_view s);
std::optional<Centrality> parse_centrality(std::string_view s);
std::optional<SectionKind> parse_section_kind(std::string_view s);
std::optional<VenueKind> parse_venue_kind(std::string_view s);

constexpr std::size_t index_of(Function f) { return static_cast<std::size_t>(f); }
constexpr std::size_t index_of(Centrality c) { return static_cast<std::size_t>(c); }
constexpr std::size_t index_of(SectionKind k) { return static_cast<std::size_t>(k); }
constexpr std::size_t index_of(VenueKind v) { return static_cast<std::size_t>(v); }

}  // namespace citescope
